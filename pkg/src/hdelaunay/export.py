"""Deterministic text exporters: CSV profiles, JSON reports, SVG phase portraits, OBJ meshes."""

from __future__ import annotations

import json
import math
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .ambient import AmbientSpace, berger_embed
from .classifier import Profile
from .errors import DomainError
from .integrator import Event, mean_curvature, second_derivatives
from .phaseplane import (PhaseState, equilibrium, gamma_curve, in_phase_plane, omega_y,
                         region_classify)
from .prescribed import PrescribedH, eval_h

CSV_HEADER = "s,x,z,theta,nu,eps,H_residual"
PALETTE = {
    "omega": "#1b1b1b",
    "gamma": "#d95f02",
    "equilibrium": "#7570b3",
    "glyph": "#9e9e9e",
    "orbits": ["#1b9e77", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"],
}


def _g(v) -> str:
    return "%.17g" % float(v)


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def h_residuals(space: AmbientSpace, h: PrescribedH, x, theta) -> np.ndarray:
    """Pointwise ``|H - h(nu)|``; ``nan`` on the axis where the formula is singular."""
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    out = np.full(x.shape, np.nan)
    ok = x > 0
    if np.any(ok):
        dx, dz, ddx, ddz = second_derivatives(space, h, x[ok], theta[ok])
        H = mean_curvature(space, x[ok], dx, dz, ddx, ddz)
        nu = np.clip(np.cos(theta[ok]) / np.sqrt(1.0 + space.tau**2 * x[ok] ** 2), -1, 1)
        out[ok] = np.abs(H - np.asarray(eval_h(h, nu)))
    return out


def profile_csv(space: AmbientSpace, h: PrescribedH, profile: Profile) -> str:
    """CSV with a fixed header and 17 significant digits."""
    nu = profile.nu(space)
    eps = np.sign(np.sin(profile.theta)).astype(int)
    res = h_residuals(space, h, profile.x, profile.theta)
    lines = [CSV_HEADER]
    for row in zip(profile.s, profile.x, profile.z, profile.theta, nu, eps, res):
        lines.append(",".join([_g(row[0]), _g(row[1]), _g(row[2]), _g(row[3]), _g(row[4]),
                               str(int(row[5])), _g(row[6])]))
    return "\n".join(lines) + "\n"


def read_profile_csv(text: str) -> Profile:
    rows = text.strip().splitlines()
    if not rows or rows[0].strip() != CSV_HEADER:
        raise DomainError(f"profile CSV must start with the header {CSV_HEADER!r}")
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]], dtype=float)
    if data.ndim != 2 or len(data) < 2:
        raise DomainError("profile CSV needs at least two samples")
    closed = bool(np.hypot(data[0, 1] - data[-1, 1], data[0, 2] - data[-1, 2]) < 1e-9
                  and data[0, 1] > 0)
    return Profile(data[:, 0], data[:, 1], data[:, 2], data[:, 3], closed)


def events_json(events: Iterable[Event]) -> str:
    return dumps([e.to_dict() for e in events])


# -- SVG -------------------------------------------------------------------


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi, width=640, height=480):
        mx, my = 0.05 * (xhi - xlo), 0.05 * (yhi - ylo)
        self.xlo, self.xhi = xlo - mx, xhi + mx
        self.ylo, self.yhi = ylo - my, yhi + my
        self.w, self.h = width, height

    def pt(self, x, y):
        px = (x - self.xlo) / (self.xhi - self.xlo) * self.w
        py = (self.yhi - y) / (self.yhi - self.ylo) * self.h
        return f"{px:.3f},{py:.3f}"


def _polyline(frame, xs, ys, color, width=1.5, dash=None, cls=""):
    pts = " ".join(frame.pt(a, b) for a, b in zip(xs, ys))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{extra}/>')


def _runs(mask):
    """Index ranges of consecutive True entries."""
    out, start = [], None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            out.append((start, i))
            start = None
    if start is not None:
        out.append((start, len(mask)))
    return out


def phase_svg(space: AmbientSpace, h: PrescribedH, eps: int,
              orbits: Sequence[tuple[np.ndarray, np.ndarray]] = (),
              x_range: float | None = None, n_gamma: int = 801, glyph_grid=(12, 9)) -> str:
    """Phase portrait of one domain: boundary, nullcline, equilibria, orbits and glyphs."""
    e = equilibrium(space, h, eps)
    ys = np.linspace(-1.0, 1.0, n_gamma)[1:-1]
    gam = [gamma_curve(space, h, eps, float(y)) for y in ys]
    if x_range is None:
        e0 = equilibrium(space, h, 1).x
        cands = [4.0 * e0]
        # nullcline branches with an asymptote would otherwise flatten the picture
        cands += [g for g in gam if g is not None and g <= 8.0 * e0]
        cands += [float(np.max(ox)) for ox, _ in orbits if len(ox)]
        if e is not None:
            cands.append(1.5 * e.x)
        x_range = max(cands)
        if space.kappa < 0:
            x_range = min(x_range, space.wall_radius())
    fr = _Frame(0.0, x_range, -1.0, 1.0)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.w}" height="{fr.h}" '
             f'viewBox="0 0 {fr.w} {fr.h}">',
             f'<title>phase plane kappa={space.kappa:g} tau={space.tau:g} eps={eps:+d}</title>',
             '<rect width="100%" height="100%" fill="#ffffff"/>']
    # axes
    parts.append(_polyline(fr, [0, x_range], [0, 0], "#cccccc", 1.0, cls="axis"))
    parts.append(_polyline(fr, [0, 0], [-1, 1], "#cccccc", 1.0, cls="axis"))
    # boundary curves
    xs = np.linspace(0.0, x_range, 400)
    oy = omega_y(space, xs)
    parts.append(_polyline(fr, xs, oy, PALETTE["omega"], cls="omega"))
    parts.append(_polyline(fr, xs, -oy, PALETTE["omega"], cls="omega"))
    if space.kappa < 0:
        w = space.wall_radius()
        parts.append(_polyline(fr, [w, w], [-1, 1], PALETTE["omega"], 1.0, "4,3", cls="wall"))
    # nullcline, split where undefined or off-frame
    mask = [g is not None and g <= x_range for g in gam]
    for a, b in _runs(mask):
        if b - a >= 2:
            parts.append(_polyline(fr, [gam[i] for i in range(a, b)], ys[a:b],
                                   PALETTE["gamma"], 2.0, cls="gamma"))
    # glyphs
    nx, ny = glyph_grid
    for i in range(1, nx + 1):
        gx = x_range * i / (nx + 1)
        for j in range(1, ny + 1):
            gy = -1.0 + 2.0 * j / (ny + 1)
            if not in_phase_plane(space, gx, gy):
                continue
            info = region_classify(space, h, PhaseState(gx, gy, eps))
            dx, dy = info.sign_dx, info.sign_dy
            if dx == 0 and dy == 0:
                continue
            n = math.hypot(dx, dy)
            lx, ly = 0.02 * x_range * dx / n, 0.04 * dy / n
            parts.append(_polyline(fr, [gx, gx + lx], [gy, gy + ly], PALETTE["glyph"], 1.0,
                                   cls="glyph"))
            parts.append(f'<circle class="glyph" cx="{fr.pt(gx + lx, gy + ly).split(",")[0]}" '
                         f'cy="{fr.pt(gx + lx, gy + ly).split(",")[1]}" r="1.5" '
                         f'fill="{PALETTE["glyph"]}"/>')
    # orbits
    for k, (ox, oy_) in enumerate(orbits):
        color = PALETTE["orbits"][k % len(PALETTE["orbits"])]
        parts.append(_polyline(fr, ox, oy_, color, 1.5, cls="orbit"))
    # equilibria
    for eq in (equilibrium(space, h, 1), equilibrium(space, h, -1)):
        if eq is not None and eq.eps == eps and eq.x <= x_range:
            cx, cy = fr.pt(eq.x, 0.0).split(",")
            parts.append(f'<circle class="equilibrium" cx="{cx}" cy="{cy}" r="4" '
                         f'fill="{PALETTE["equilibrium"]}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- OBJ -------------------------------------------------------------------


def mesh_obj(space: AmbientSpace, profile: Profile, angular_res: int = 64,
             require_closed: bool = False, berger: bool | None = None) -> str:
    """Revolve a profile about the axis into a triangle mesh.

    Profile points on the axis become single pole vertices.  A closed profile
    (first and last points equal, off the axis) wraps around into a torus.
    For Berger spheres each vertex is followed by a ``# v4`` comment with its
    coordinates in the unit sphere of R^4.
    """
    if angular_res < 3:
        raise DomainError("angular resolution must be at least 3")
    x = np.asarray(profile.x, dtype=float)
    z = np.asarray(profile.z, dtype=float)
    closed_loop = bool(profile.closed and x[0] > 0
                       and math.hypot(x[0] - x[-1], z[0] - z[-1]) < 1e-6)
    if require_closed and not (closed_loop or (x[0] == 0 and x[-1] == 0)):
        raise DomainError("a closed mesh was requested but the profile is open")
    if closed_loop:
        x, z = x[:-1], z[:-1]
    if berger is None:
        berger = space.kappa > 0 and space.tau > 0
    phi = 2.0 * math.pi * np.arange(angular_res) / angular_res
    c, s = np.cos(phi), np.sin(phi)
    lines = [f"# revolved profile: {len(x)} samples x {angular_res} angles",
             f"# kappa {space.kappa:.17g} tau {space.tau:.17g}"]
    ring = []  # per profile sample: list of vertex indices (1-based)
    nv = 0

    def emit(p):
        nonlocal nv
        lines.append("v %.12g %.12g %.12g" % tuple(p))
        if berger:
            q = berger_embed(space, p)
            lines.append("# v4 %.12g %.12g %.12g %.12g" % tuple(q))
        nv += 1
        return nv

    for xi, zi in zip(x, z):
        if xi <= 0.0:
            ring.append([emit((0.0, 0.0, zi))])
        else:
            ring.append([emit((xi * ci, xi * si, zi)) for ci, si in zip(c, s)])
    faces = []
    n = len(ring)
    pairs = [(i, i + 1) for i in range(n - 1)]
    if closed_loop:
        pairs.append((n - 1, 0))
    m = angular_res
    for a, b in pairs:
        ra, rb = ring[a], ring[b]
        if len(ra) == 1 and len(rb) == 1:
            continue
        for j in range(m):
            k = (j + 1) % m
            if len(ra) == 1:
                faces.append((ra[0], rb[j], rb[k]))
            elif len(rb) == 1:
                faces.append((ra[j], rb[0], ra[k]))
            else:
                faces.append((ra[j], rb[j], rb[k]))
                faces.append((ra[j], rb[k], ra[k]))
    lines += ["f %d %d %d" % f for f in faces]
    return "\n".join(lines) + "\n"


def obj_euler_characteristic(text: str) -> int:
    """``V - E + F`` of an OBJ triangle mesh."""
    v = 0
    faces = []
    for line in text.splitlines():
        if line.startswith("v "):
            v += 1
        elif line.startswith("f "):
            faces.append(tuple(int(t.split("/")[0]) for t in line.split()[1:]))
    edges = {tuple(sorted((f[i], f[(i + 1) % len(f)]))) for f in faces for i in range(len(f))}
    return v - len(edges) + len(faces)


def obj_boundary_edges(text: str) -> int:
    """Number of edges used by a single face (zero for a watertight mesh)."""
    cnt: Counter = Counter()
    for line in text.splitlines():
        if line.startswith("f "):
            f = [int(t) for t in line.split()[1:]]
            for i in range(len(f)):
                cnt[tuple(sorted((f[i], f[(i + 1) % len(f)])))] += 1
    return sum(1 for c in cnt.values() if c == 1)
