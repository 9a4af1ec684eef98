import math

import numpy as np
import pytest

from hdelaunay import (AmbientSpace, ConstantH, DomainError, Seed, build_cylinder, classify,
                       find_torus, s2r_torus, shoot_sphere)
from hdelaunay.classifier import Profile
from hdelaunay.export import (CSV_HEADER, dumps, events_json, mesh_obj, obj_boundary_edges,
                              obj_euler_characteristic, phase_svg, profile_csv,
                              read_profile_csv)

ONE = ConstantH(1.0)
EUCLID = AmbientSpace(0.0, 0.0, degenerate_ok=True)


def test_dumps_is_canonical():
    a = dumps({"b": np.float64(1.5), "a": [np.int64(2), np.arange(2)]})
    assert a == '{\n  "a": [\n    2,\n    [\n      0,\n      1\n    ]\n  ],\n  "b": 1.5\n}\n'


def test_profile_csv_roundtrip_and_precision():
    s = shoot_sphere(EUCLID, ONE)
    text = profile_csv(EUCLID, ONE, s.profile)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    back = read_profile_csv(text)
    assert np.array_equal(back.x, s.profile.x) and np.array_equal(back.theta, s.profile.theta)
    # axis rows carry no residual; the rest are tiny
    res = np.array([float(r.split(",")[-1]) for r in lines[1:]])
    assert np.isnan(res[0]) and np.nanmax(res) < 1e-10


def test_read_profile_csv_rejects_other_headers():
    with pytest.raises(DomainError):
        read_profile_csv("a,b\n1,2\n")


def test_events_json():
    n = classify(EUCLID, ONE, Seed("y0", 1.5))
    d = events_json(n.trajectory.events)
    assert d.startswith("[") and '"kind": "OmegaMinus"' in d


def _svg(space, eps, orbits=()):
    return phase_svg(space, ONE, eps, orbits)


def test_svg_is_deterministic_and_complete():
    sp = AmbientSpace(0.0, 1.0)
    a, b = _svg(sp, 1), _svg(sp, 1)
    assert a == b
    for cls in ("omega", "gamma", "glyph", "equilibrium"):
        assert f'class="{cls}"' in a


def test_svg_nullcline_shapes():
    # Nil: the height-decreasing nullcline splits into two branches around y = 0
    assert _svg(AmbientSpace(0.0, 1.0), -1).count('class="gamma"') == 2
    # product with the hyperbolic plane: no nullcline in that domain, wall drawn
    hyp = _svg(AmbientSpace(-1.0, 0.0), -1)
    assert 'class="gamma"' not in hyp and 'class="wall"' in hyp
    # Berger sphere: one compact arc
    assert _svg(AmbientSpace(4.0, 0.5), -1).count('class="gamma"') == 1


def test_svg_draws_orbits():
    x = np.linspace(0.3, 0.7, 20)
    svg = _svg(EUCLID, 1, [(x, 0.2 * np.sin(np.pi * (x - 0.3) / 0.4))])
    assert svg.count('class="orbit"') == 1


def test_sphere_mesh_has_sphere_topology():
    obj = mesh_obj(EUCLID, shoot_sphere(EUCLID, ONE).profile, 24, require_closed=True)
    assert obj_euler_characteristic(obj) == 2
    assert obj_boundary_edges(obj) == 0


def test_torus_mesh_has_torus_topology():
    t = s2r_torus(AmbientSpace(1.0, 0.0), ONE)
    obj = mesh_obj(AmbientSpace(1.0, 0.0), t.profile, 16, require_closed=True)
    assert obj_euler_characteristic(obj) == 0
    assert obj_boundary_edges(obj) == 0


def test_closed_nodoid_mesh_is_a_torus():
    sp = AmbientSpace(0.0, 1.0)
    r = find_torus(sp, 1.0, 0.8, 1e-4)
    obj = mesh_obj(sp, r.nodoid.profile, 16, require_closed=True)
    assert obj_euler_characteristic(obj) == 0 and obj_boundary_edges(obj) == 0


def test_open_tube():
    r = build_cylinder(EUCLID, ONE).radius
    z = np.linspace(0.0, 1.0, 11)
    p = Profile(z, np.full(11, r), z, np.full(11, math.pi / 2))
    obj = mesh_obj(EUCLID, p, 12)
    assert obj_euler_characteristic(obj) == 0
    assert obj_boundary_edges(obj) == 24
    with pytest.raises(DomainError):
        mesh_obj(EUCLID, p, 12, require_closed=True)


def test_berger_mesh_carries_sphere_coordinates():
    sp = AmbientSpace(4.0, 0.5)
    obj = mesh_obj(sp, shoot_sphere(sp, ONE).profile, 8)
    v4 = [list(map(float, l.split()[2:])) for l in obj.splitlines() if l.startswith("# v4")]
    v = [l for l in obj.splitlines() if l.startswith("v ")]
    assert len(v4) == len(v)
    assert np.allclose(np.sum(np.array(v4) ** 2, axis=1), 1.0, atol=1e-12)


def test_mesh_vertex_positions():
    z = np.array([0.0, 1.0])
    p = Profile(z, np.array([2.0, 2.0]), z, np.full(2, math.pi / 2))
    obj = mesh_obj(EUCLID, p, 4)
    first = [tuple(map(float, l.split()[1:])) for l in obj.splitlines() if l.startswith("v ")][:4]
    assert np.allclose(first, [(2, 0, 0), (0, 2, 0), (-2, 0, 0), (0, -2, 0)], atol=1e-15)
