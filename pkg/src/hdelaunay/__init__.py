"""Rotational surfaces of prescribed mean curvature in homogeneous 3-spaces."""

from .ambient import AmbientSpace, berger_embed, metric_coeffs, vertical_period
from .classifier import (BergerPoleChain, Cylinder, Nodoid, Profile, Seed, Sphere,
                         SurfaceClass, TorusS2xR, Unduloid, berger_compactness,
                         berger_pole_orbit, build_cylinder, classify, s2r_torus,
                         shoot_sphere, trace_nodoid, trace_unduloid)
from .errors import (AmbiguousSeedError, ArcDegeneracyError, ClassificationError, DomainError,
                     HDelaunayError, IntegrationError, SearchFailure, SeedError, SpecError,
                     UnsupportedSpaceError)
from .integrator import AngularState, Budget, StopSpec, Trajectory, axis_start, integrate
from .phaseplane import equilibrium, gamma_curve, in_phase_plane, region_classify
from .prescribed import (ConstantH, StepFamilySpec, StepH, TableH, eval_dh, eval_h,
                         make_step_family, validate_c1)
from .torus import find_torus, gap_by_arclength, nonexistence_check, torus_gap

__version__ = "0.1.0"
