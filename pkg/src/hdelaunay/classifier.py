"""Construction and classification of complete rotational surfaces.

Each surface type is built from a seed in the phase plane and returned as a
small tagged record.  Profiles are kept alongside for export but are not part
of the JSON form.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .ambient import AmbientSpace, vertical_period
from .errors import (AmbiguousSeedError, ClassificationError, SearchFailure, SeedError,
                     UnsupportedSpaceError)
from .integrator import (AngularState, Budget, StopSpec, Trajectory, axis_start, integrate)
from .phaseplane import equilibrium
from .prescribed import PrescribedH, eval_h

SEPARATRIX_TOL = 1e-9


@dataclass
class Profile:
    """A sampled profile curve ``(s, x, z, theta)`` in the orbit plane."""

    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    closed: bool = False

    @classmethod
    def from_trajectory(cls, traj: Trajectory, n: int | None = None, closed=False):
        if n:
            d = traj.resample(n)
            return cls(d["s"], d["x"], d["z"], d["theta"], closed)
        return cls(traj.s.copy(), traj.x.copy(), traj.z.copy(), traj.theta.copy(), closed)

    def nu(self, space: AmbientSpace) -> np.ndarray:
        return np.cos(self.theta) / np.sqrt(1.0 + space.tau**2 * self.x**2)


def _profile_field():
    return field(default=None, repr=False, compare=False)


@dataclass
class SurfaceClass:
    tag = "Surface"

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("profile", "trajectory")}
        d = {k: ([float(u) for u in v] if isinstance(v, tuple)
                 else v.item() if isinstance(v, np.generic) else v) for k, v in d.items()}
        return {"tag": self.tag, **d}


@dataclass
class Cylinder(SurfaceClass):
    radius: float
    cmc: float
    hopf_torus: bool = False
    profile: Profile | None = _profile_field()
    tag = "Cylinder"


@dataclass
class Sphere(SurfaceClass):
    r0: float
    height: float
    embedded: bool = True
    profile: Profile | None = _profile_field()
    tag = "Sphere"


@dataclass
class Unduloid(SurfaceClass):
    neck: float
    bulge: float
    T_arc: float
    z_pitch: float
    closure_residual: float
    profile: Profile | None = _profile_field()
    tag = "Unduloid"


@dataclass
class Nodoid(SurfaceClass):
    x0: float
    x1: float
    x2: float
    z0: float
    z2: float
    closes: bool
    closure_residual: float
    profile: Profile | None = _profile_field()
    trajectory: Trajectory | None = _profile_field()
    tag = "Nodoid"


@dataclass
class TorusS2xR(SurfaceClass):
    x1: float
    closure_residual: float
    symmetry_residual: float
    profile: Profile | None = _profile_field()
    tag = "TorusS2xR"


@dataclass
class TorusRotational(SurfaceClass):
    x0: float
    x1: float
    x2: float
    closure_residual: float
    profile: Profile | None = _profile_field()
    tag = "TorusRotational"


@dataclass(frozen=True)
class Compactness:
    kind: str  # "EmbeddedTorus", "ImmersedTorus" or "DenseNoncompact"
    p: int | None = None
    q: int | None = None

    def to_dict(self):
        return {"kind": self.kind, "p": self.p, "q": self.q}


@dataclass
class BergerPoleChain(SurfaceClass):
    xi0: float
    bracket: tuple[float, float]
    z_drift: float
    drift_period: float
    compactness: dict
    iterations: int
    profile: Profile | None = _profile_field()
    tag = "BergerPoleChain"


def build_cylinder(space: AmbientSpace, h: PrescribedH) -> Cylinder:
    """Vertical cylinder over the equilibrium of the height-increasing domain."""
    r = equilibrium(space, h, 1).x
    hopf = space.kappa > 0 and space.tau > 0
    return Cylinder(r, eval_h(h, 0.0), hopf)


def shoot_sphere(space: AmbientSpace, h: PrescribedH, budget: Budget | None = None) -> Sphere:
    """The sphere through the axis, closed by reflection across its equator."""
    tr = integrate(space, h, axis_start(space, h, 1), StopSpec(y0_crossings=1), budget)
    if tr.status != "y0":
        raise ClassificationError(f"sphere orbit ended with {tr.status!r} before reaching y = 0")
    if tr.events_of("OmegaPlus", "OmegaMinus"):
        raise ClassificationError("sphere orbit touched the phase-plane boundary")
    ev = tr.events_of("Y0Crossing")[-1]
    r0, zq, sq = ev.x, ev.z, ev.s
    height = 2.0 * zq
    period = vertical_period(space)
    embedded = True if period is None else bool(height < period)
    s = np.concatenate([[0.0], tr.s, 2 * sq - tr.s[-2::-1], [2 * sq]])
    x = np.concatenate([[0.0], tr.x, tr.x[-2::-1], [0.0]])
    z = np.concatenate([[0.0], tr.z, 2 * zq - tr.z[-2::-1], [height]])
    th = np.concatenate([[0.0], tr.theta, math.pi - tr.theta[-2::-1], [math.pi]])
    return Sphere(r0, height, embedded, Profile(s, x, z, th, closed=True))


def _check_separatrix(x0, value, name):
    if abs(x0 - value) <= SEPARATRIX_TOL * max(1.0, value):
        raise AmbiguousSeedError(f"seed x0 = {x0} is within {SEPARATRIX_TOL:g} of {name} = {value}")


def trace_unduloid(space: AmbientSpace, h: PrescribedH, x0: float,
                   budget: Budget | None = None) -> Unduloid:
    """One period of the unduloid with neck ``x0``."""
    e0 = equilibrium(space, h, 1).x
    _check_separatrix(x0, e0, "the cylinder radius")
    if not 0 < x0 < e0:
        raise SeedError(f"unduloid neck x0 = {x0} must lie in (0, {e0})")
    init = AngularState(0.0, x0, 0.0, math.pi / 2)
    tr = integrate(space, h, init, StopSpec(period_closure=True, y0_crossings=4), budget)
    if tr.events_of("OmegaPlus", "OmegaMinus"):
        raise SeedError(f"orbit from x0 = {x0} leaves the height-increasing domain")
    if tr.status != "period":
        raise ClassificationError(f"unduloid orbit did not close its period ({tr.status})")
    y0 = tr.events_of("Y0Crossing")
    bulge = y0[0].x
    end = tr.events[-1]
    res = math.hypot(end.x - x0, end.nu)
    return Unduloid(x0, bulge, end.s, end.z, res, Profile.from_trajectory(tr))


def trace_nodoid(space: AmbientSpace, h: PrescribedH, x0: float,
                 budget: Budget | None = None, closure_tol: float = 1e-6,
                 r0: float | None = None) -> Nodoid:
    """One loop of the nodoid whose outer waist is ``x0``.

    The orbit starts at ``(x0, theta = pi/2)`` and runs to ``theta = 5 pi/2``.
    Heights ``z0`` and ``z2`` are measured from the starting level at the two
    boundary contacts; the loop closes when ``z2 = -z0``.
    """
    if r0 is None:
        r0 = shoot_sphere(space, h, budget).r0
    _check_separatrix(x0, r0, "the sphere radius")
    if not x0 > r0:
        raise SeedError(f"nodoid seed x0 = {x0} must exceed the sphere radius {r0}")
    init = AngularState(0.0, x0, 0.0, math.pi / 2)
    tr = integrate(space, h, init, StopSpec(theta=2.5 * math.pi), budget)
    if tr.status != "theta":
        raise ClassificationError(f"nodoid orbit ended with {tr.status!r}")
    om = tr.events_of("OmegaMinus")
    op = tr.events_of("OmegaPlus")
    inner = [e for e in tr.events_of("Y0Crossing") if math.sin(e.theta) < 0]
    if not (om and op and inner):
        raise ClassificationError("nodoid orbit is missing a boundary contact or inner crossing")
    x1, z0 = om[0].x, om[0].z
    x2, z2 = inner[0].x, op[0].z
    res = abs(z2 + z0)
    return Nodoid(x0, x1, x2, z0, z2, bool(res < closure_tol), res,
                  Profile.from_trajectory(tr, closed=res < closure_tol), tr)


def s2r_torus(space: AmbientSpace, h: PrescribedH, budget: Budget | None = None) -> TorusS2xR:
    """The torus in S^2 x R through the equator fibre with ``nu = 1``."""
    if not (space.kappa > 0 and space.tau == 0):
        raise UnsupportedSpaceError("the equator torus needs kappa > 0 and tau = 0")
    xs = 2.0 / math.sqrt(space.kappa)
    init = AngularState(0.0, xs, 0.0, 0.0)
    tr = integrate(space, h, init, StopSpec(theta=2.0 * math.pi), budget)
    if tr.status != "theta":
        raise ClassificationError(f"equator orbit ended with {tr.status!r}")
    y0 = tr.events_of("Y0Crossing")
    x1 = y0[0].x
    end = tr.final
    res = max(abs(end.x - xs), abs(end.z), abs(end.nu(space) - 1.0))
    # reflection s -> 2 s_a - s, y -> -y about the first y = 0 crossing (periodic wrap)
    s1, sa, za = end.s, y0[0].s, y0[0].z
    u = np.linspace(0.0, 0.5 * s1, 201)
    fwd = _at_s(tr, sa + u)
    bwd = _at_s(tr, np.mod(sa - u, s1))
    nu_f = np.cos(fwd[2]) / np.sqrt(1.0 + space.tau**2 * fwd[0] ** 2)
    nu_b = np.cos(bwd[2]) / np.sqrt(1.0 + space.tau**2 * bwd[0] ** 2)
    sym = float(max(np.max(np.abs(fwd[0] - bwd[0])), np.max(np.abs(nu_f + nu_b)),
                    np.max(np.abs(fwd[1] + bwd[1] - 2.0 * za))))
    return TorusS2xR(x1, res, sym, Profile.from_trajectory(tr, closed=True))


def _at_s(tr: Trajectory, s):
    """Dense state ``[x, z, theta, s]`` at arc lengths ``s`` (monotone in sigma)."""
    return tr.state_at_s(s)


def berger_compactness(drift: float, period, max_den: int = 64) -> Compactness:
    """Classify a vertical drift against a period by rational approximation.

    ``period`` is a number or an ``AmbientSpace`` (whose fibre length is used).
    """
    if isinstance(period, AmbientSpace):
        p = vertical_period(period)
        if p is None:
            raise UnsupportedSpaceError("compactness needs kappa > 0 and tau > 0")
        period = p
    ratio = abs(drift) / period
    frac = Fraction(ratio).limit_denominator(max_den)
    if abs(ratio - frac) > 1e-9:
        return Compactness("DenseNoncompact")
    if frac == 1:
        return Compactness("EmbeddedTorus", 1, 1)
    return Compactness("ImmersedTorus", frac.numerator, frac.denominator)


def _pole_outcome(space, h, xi, budget):
    """+1 if the orbit from ``(xi, theta = 3 pi/2)`` returns to ``y = 0``, -1 if it meets the boundary."""
    init = AngularState(0.0, xi, 0.0, 1.5 * math.pi)
    tr = integrate(space, h, init, StopSpec(y0_crossings=1, omega_contacts=1), budget)
    if tr.status == "y0":
        return 1
    if tr.status == "omega":
        return -1
    return 0


def berger_pole_orbit(space: AmbientSpace, h: PrescribedH, xtol: float = 1e-8,
                      x_max: float = 1e12, lo: float | None = None,
                      hi: float | None = None) -> BergerPoleChain:
    """Locate the seed whose orbit escapes to infinity in both directions.

    Seeds ``xi`` on ``y = 0`` of the height-decreasing domain are bisected
    between orbits meeting the boundary curve (small ``xi``) and orbits
    returning to ``y = 0`` (``xi`` near the equilibrium).
    """
    if not (space.kappa > 0 and space.tau > 0):
        raise UnsupportedSpaceError("pole orbits exist for kappa > 0 and tau > 0 only")
    em1 = equilibrium(space, h, -1).x
    budget = Budget(x_max=x_max, s_max=1e30, max_step=1.0)
    lo = 0.05 * em1 if lo is None else lo
    hi = em1 * (1 - 1e-3) if hi is None else hi
    o_lo, o_hi = _pole_outcome(space, h, lo, budget), _pole_outcome(space, h, hi, budget)
    report = {"lo": lo, "hi": hi, "outcome_lo": o_lo, "outcome_hi": o_hi}
    if not (o_lo == -1 and o_hi == 1):
        raise SearchFailure("pole-orbit seeds do not bracket the separatrix", report)
    it = 0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        o = _pole_outcome(space, h, mid, budget)
        if o == 0:
            report.update(lo=lo, hi=hi, escaped=mid)
            raise SearchFailure("seed escaped the x budget before deciding", report)
        if o == 1:
            hi = mid
        else:
            lo = mid
        it += 1
    xi0 = 0.5 * (lo + hi)
    # limit height along the outward branch: fit z = z_inf + c/x + d/x^2 + e x, the
    # last term being the slow departure of the near-separatrix seed
    radii = np.array([1e3, 1e4, 1e5, 1e6])
    zs = []
    for xm in radii:
        tr = integrate(space, h, AngularState(0.0, hi, 0.0, 1.5 * math.pi),
                       StopSpec(y0_crossings=1, omega_contacts=1),
                       Budget(x_max=xm, s_max=1e30, max_step=1.0))
        if tr.status != "escape":
            raise SearchFailure("separatrix seed did not reach the tail radius", report)
        zs.append(tr.final.z)
    basis = np.column_stack([np.ones(4), 1e3 / radii, 1e6 / radii**2, radii / 1e6])
    z_inf = float(np.linalg.solve(basis, np.array(zs))[0])
    drift = 2.0 * abs(z_inf)
    period = 4.0 * math.pi * space.tau / space.kappa
    comp = berger_compactness(drift, period)
    prof = Profile.from_trajectory(tr)
    return BergerPoleChain(xi0, (lo, hi), drift, period, comp.to_dict(), it, prof)


@dataclass(frozen=True)
class Seed:
    """Classification seed.

    ``kind`` is one of ``"axis"``, ``"equilibrium"``, ``"y0"`` (with ``x0`` and
    ``eps``), ``"s2r-torus"`` or ``"berger-pole"``.
    """

    kind: str
    x0: float | None = None
    eps: int = 1


def classify(space: AmbientSpace, h: PrescribedH, seed: Seed,
             budget: Budget | None = None) -> SurfaceClass:
    """Dispatch a seed to the surface it generates."""
    if seed.kind == "axis":
        return shoot_sphere(space, h, budget)
    if seed.kind == "equilibrium":
        return build_cylinder(space, h)
    if seed.kind == "s2r-torus":
        return s2r_torus(space, h, budget)
    if seed.kind == "berger-pole":
        return berger_pole_orbit(space, h)
    if seed.kind != "y0" or seed.x0 is None:
        raise SeedError(f"unknown seed {seed}")
    x0 = seed.x0
    space.check_x(x0)
    if seed.eps == 1:
        e0 = equilibrium(space, h, 1).x
        _check_separatrix(x0, e0, "the cylinder radius")
        if x0 < e0:
            return trace_unduloid(space, h, x0, budget)
        r0 = shoot_sphere(space, h, budget).r0
        _check_separatrix(x0, r0, "the sphere radius")
        if x0 > r0:
            return trace_nodoid(space, h, x0, budget, r0=r0)
        # a bulge: the next crossing of y = 0 is the neck
        tr = integrate(space, h, AngularState(0.0, x0, 0.0, math.pi / 2),
                       StopSpec(y0_crossings=1), budget)
        if tr.status != "y0":
            raise ClassificationError(f"bulge orbit from {x0} ended with {tr.status!r}")
        return trace_unduloid(space, h, tr.events[-1].x, budget)
    # height-decreasing domain: follow the orbit back to its outer waist
    init = AngularState(0.0, x0, 0.0, 1.5 * math.pi)
    tr = integrate(space, h, init, StopSpec(y0_crossings=1), budget, direction=-1)
    if tr.status != "y0" or not tr.events_of("OmegaMinus"):
        raise ClassificationError(f"orbit through ({x0}, 0) in the height-decreasing domain "
                                  f"is not a nodoid loop ({tr.status})")
    return trace_nodoid(space, h, tr.events[-1].x, budget)
