import math

import numpy as np
import pytest

from hdelaunay import (AmbientSpace, AmbiguousSeedError, Budget, ClassificationError, ConstantH, SeedError, Seed,
                       TableH, UnsupportedSpaceError, berger_compactness, berger_pole_orbit,
                       build_cylinder, classify, eval_h, s2r_torus, shoot_sphere, trace_nodoid,
                       trace_unduloid)

import oracles

ONE = ConstantH(1.0)
EUCLID = AmbientSpace(0.0, 0.0, degenerate_ok=True)
BERGER = AmbientSpace(4.0, 0.5)


@pytest.mark.parametrize("H0", [0.5, 1.0, 2.0])
def test_euclidean_sphere(H0):
    s = shoot_sphere(EUCLID, ConstantH(H0))
    assert s.r0 == pytest.approx(1 / H0, abs=1e-10)
    assert s.height == pytest.approx(2 / H0, abs=1e-10)
    assert s.embedded


def test_sphere_profile_is_closed_and_symmetric():
    s = shoot_sphere(AmbientSpace(0.0, 1.0), ONE)
    p = s.profile
    assert p.closed and p.x[0] == 0.0 and p.x[-1] == 0.0
    assert np.allclose(p.x, p.x[::-1], atol=1e-14)
    assert np.allclose(p.z + p.z[::-1], s.height, atol=1e-14)


def test_sphere_matches_independent_solver(space):
    h = TableH([(0.0, 1.0), (1.0, 1.3)])
    s = shoot_sphere(space, h)
    r, z = oracles.sphere_equator(space.kappa, space.tau, lambda y: eval_h(h, y))
    assert s.r0 == pytest.approx(r, abs=1e-8)
    assert s.height == pytest.approx(2 * z, abs=1e-8)


def test_berger_sphere_embeddedness():
    # the vertical fibre has length pi here; the CMC-1 sphere is shorter
    s = shoot_sphere(BERGER, ONE)
    assert s.height < math.pi and s.embedded


def test_cylinder():
    c = build_cylinder(EUCLID, ONE)
    assert c.radius == 0.5 and c.cmc == 1.0 and not c.hopf_torus
    assert build_cylinder(BERGER, ONE).hopf_torus


def test_euclidean_unduloid():
    u = trace_unduloid(EUCLID, ONE, 0.3)
    assert u.bulge == pytest.approx(0.7, abs=1e-12)
    assert u.T_arc == pytest.approx(math.pi, abs=1e-10)
    assert u.z_pitch == pytest.approx(oracles.unduloid_pitch(0.3, 0.7), abs=1e-10)
    assert u.closure_residual < 1e-10


def test_unduloid_rejects_wrong_side():
    with pytest.raises(SeedError):
        trace_unduloid(EUCLID, ONE, 0.7)
    with pytest.raises(AmbiguousSeedError):
        trace_unduloid(EUCLID, ONE, 0.5 + 1e-12)


def test_euclidean_nodoid():
    n = trace_nodoid(EUCLID, ONE, 1.5)
    assert n.x1 == pytest.approx(math.sqrt(0.75), abs=1e-12)
    assert n.x2 == pytest.approx(0.5, abs=1e-12)
    up, down = oracles.nodoid_heights(0.5, 1.5)
    assert n.z0 == pytest.approx(up, abs=1e-10)
    assert n.z2 == pytest.approx(down, abs=1e-10)
    # constant mean curvature nodoids do not close
    assert not n.closes and n.closure_residual == pytest.approx(abs(n.z0 + n.z2))


def test_nodoid_requires_seed_beyond_sphere():
    with pytest.raises(SeedError):
        trace_nodoid(EUCLID, ONE, 0.9)
    with pytest.raises(AmbiguousSeedError):
        trace_nodoid(EUCLID, ONE, 1.0 + 1e-12)


def test_omega_contacts_bend_the_right_way(space):
    from hdelaunay.integrator import second_derivatives
    n = trace_nodoid(space, ONE, 1.3)
    for e in n.trajectory.events_of("OmegaPlus", "OmegaMinus"):
        ddz = second_derivatives(space, ONE, np.array([e.x]), np.array([e.theta]))[3][0]
        assert ddz > 0 if e.kind == "OmegaPlus" else ddz < 0


def test_s2r_torus():
    t = s2r_torus(AmbientSpace(1.0, 0.0), ONE)
    assert t.x1 == pytest.approx(1 + math.sqrt(5), abs=1e-10)
    assert t.closure_residual < 1e-10 and t.symmetry_residual < 1e-10
    assert t.profile.closed
    with pytest.raises(UnsupportedSpaceError):
        s2r_torus(BERGER, ONE)


@pytest.mark.parametrize("drift,kind,pq", [(math.pi, "EmbeddedTorus", (1, 1)),
                                           (2 * math.pi / 3, "ImmersedTorus", (2, 3)),
                                           (math.pi / math.sqrt(2), "DenseNoncompact",
                                            (None, None))])
def test_berger_compactness(drift, kind, pq):
    c = berger_compactness(drift, math.pi)
    assert c.kind == kind and (c.p, c.q) == pq


def test_berger_compactness_uses_fibre_length():
    assert berger_compactness(math.pi, BERGER).kind == "EmbeddedTorus"
    with pytest.raises(UnsupportedSpaceError):
        berger_compactness(1.0, AmbientSpace(0.0, 1.0))


def test_berger_pole_orbit_matches_independent_bisection():
    b = berger_pole_orbit(BERGER, ONE)
    lo, hi = b.bracket
    assert hi - lo < 1e-8 and lo <= b.xi0 <= hi
    assert b.xi0 < math.sqrt(2) + 1
    ref = oracles.pole_seed(4.0, 0.5, lambda y: 1.0, 0.2, 2.0)
    assert b.xi0 == pytest.approx(ref, abs=1e-7)
    # frozen from this run and the oracle; the drift has no closed form
    assert b.z_drift == pytest.approx(1.7458463, abs=1e-5)
    assert b.drift_period == pytest.approx(math.pi / 2)
    assert b.compactness["kind"] == "DenseNoncompact"


def test_classify_dispatch():
    assert classify(EUCLID, ONE, Seed("axis")).tag == "Sphere"
    assert classify(EUCLID, ONE, Seed("equilibrium")).tag == "Cylinder"
    assert classify(EUCLID, ONE, Seed("y0", 0.3)).tag == "Unduloid"
    # a bulge seed is traced from its neck
    u = classify(EUCLID, ONE, Seed("y0", 0.7))
    assert u.tag == "Unduloid" and u.neck == pytest.approx(0.3, abs=1e-12)
    assert classify(EUCLID, ONE, Seed("y0", 1.5)).tag == "Nodoid"
    assert classify(AmbientSpace(1.0, 0.0), ONE, Seed("s2r-torus")).tag == "TorusS2xR"


def test_classify_height_decreasing_seed_finds_the_loop():
    n = classify(EUCLID, ONE, Seed("y0", 0.5, eps=-1))
    assert n.tag == "Nodoid"
    assert n.x0 == pytest.approx(1.5, abs=1e-10)


def test_classify_ambiguous_seed():
    with pytest.raises(AmbiguousSeedError):
        classify(EUCLID, ONE, Seed("y0", 0.5))


def test_to_dict_drops_curves():
    d = classify(EUCLID, ONE, Seed("y0", 1.5)).to_dict()
    assert d["tag"] == "Nodoid" and "profile" not in d and "trajectory" not in d
    assert all(not isinstance(v, np.generic) for v in d.values())


def test_budget_is_honoured():
    with pytest.raises(ClassificationError):
        trace_unduloid(EUCLID, ONE, 0.3, Budget(s_max=1.0))
