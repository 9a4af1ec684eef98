"""Vector fields and event-driven integration of rotational profile curves.

The master system is the angular one,

    x' = cos(theta) / sqrt(1 + tau^2 x^2)
    z' = 4 sin(theta) / (4 + kappa x^2)
    theta' = (8 h(nu) - (4 - kappa x^2) / x * sin(theta)) / ((4 + kappa x^2) sqrt(1 + tau^2 x^2))

with ``nu = cos(theta) / sqrt(1 + tau^2 x^2)``.  It is regular where the phase
system degenerates (``sin(theta) = 0``), so orbits pass between the two
phase-plane domains without special handling.

Internally the independent variable is ``sigma`` with ``ds/dsigma = 1 + tau^2 x^2``
and arc length carried as a fourth state.  This keeps step counts bounded on
orbits escaping to large ``x`` where arc length grows like ``x^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .ambient import AmbientSpace
from .errors import DomainError, IntegrationError
from .phaseplane import PhaseState
from .prescribed import PrescribedH, eval_dh, eval_h

X_FLOOR = 1e-8
S_SEED = 1e-5
SCAN = 7

EVENT_KINDS = ("Y0Crossing", "OmegaPlus", "OmegaMinus", "AxisContact", "WallApproach",
               "EscapeXMax", "PeriodClosure", "StallBudget", "ThetaTarget")


@dataclass(frozen=True)
class AngularState:
    s: float
    x: float
    z: float
    theta: float

    def nu(self, space: AmbientSpace) -> float:
        return math.cos(self.theta) / math.sqrt(1.0 + space.tau**2 * self.x**2)

    def eps(self) -> int:
        return int(np.sign(math.sin(self.theta)))


@dataclass(frozen=True)
class Event:
    kind: str
    s: float
    x: float
    z: float
    theta: float
    nu: float

    def to_dict(self):
        return {"kind": self.kind, "s": self.s, "x": self.x, "z": self.z,
                "theta": self.theta, "nu": self.nu}


@dataclass(frozen=True)
class StopSpec:
    """When to stop, first condition met wins.

    Parameters
    ----------
    y0_crossings : int, optional
        Stop at this many crossings of ``nu = 0``.
    omega_contacts : int, optional
        Stop at this many contacts with the boundary curve.
    theta : float, optional
        Stop when the angle reaches this value.
    period_closure : bool
        Stop when the orbit returns to its initial ``(x, nu)`` on the section
        through the initial angle.
    axis : bool
        Stop at the axis (always terminal; the flag only controls whether the
        contact counts as a normal stop or is reported as ``status="axis"``).
    """

    y0_crossings: int | None = None
    omega_contacts: int | None = None
    theta: float | None = None
    period_closure: bool = False
    axis: bool = True


@dataclass(frozen=True)
class Budget:
    s_max: float = 200.0
    x_max: float | None = None
    max_events: int = 10_000
    max_steps: int = 200_000
    rtol: float = 1e-12
    atol: float = 1e-14
    max_step: float = 0.02
    x_floor: float = X_FLOOR


@dataclass
class Trajectory:
    """An integrated profile curve with located events.

    ``sigma``, ``s``, ``x``, ``z``, ``theta`` are the accepted solver nodes
    (event points included), ordered along the direction of integration.
    """

    space: AmbientSpace
    h: PrescribedH
    sigma: np.ndarray
    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    events: list[Event]
    status: str
    direction: int = 1
    segments: list = field(default_factory=list, repr=False)

    @property
    def nu(self) -> np.ndarray:
        return np.cos(self.theta) / np.sqrt(1.0 + self.space.tau**2 * self.x**2)

    @property
    def eps(self) -> np.ndarray:
        return np.sign(np.sin(self.theta)).astype(int)

    @property
    def final(self) -> AngularState:
        return AngularState(float(self.s[-1]), float(self.x[-1]), float(self.z[-1]),
                            float(self.theta[-1]))

    def events_of(self, *kinds: str) -> list[Event]:
        return [e for e in self.events if e.kind in kinds]

    def state_at_sigma(self, sig) -> np.ndarray:
        """Dense-output state ``[x, z, theta, s]`` at one or more ``sigma``."""
        sig = np.atleast_1d(np.asarray(sig, dtype=float))
        out = np.empty((4, sig.size))
        lo = np.array([min(a, b) for a, b, _ in self.segments])
        hi = np.array([max(a, b) for a, b, _ in self.segments])
        for i, t in enumerate(sig):
            j = int(np.argmax((lo <= t) & (t <= hi))) if np.any((lo <= t) & (t <= hi)) \
                else int(np.argmin(np.minimum(abs(lo - t), abs(hi - t))))
            out[:, i] = self.segments[j][2](t)
        return out

    def state_at_s(self, s) -> np.ndarray:
        """Dense-output state ``[x, z, theta, s]`` at one or more arc lengths.

        Arc length is a state component, so ``sigma`` is recovered by root
        finding on the interpolant rather than by interpolating the nodes.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        order = np.argsort(self.s)
        ss, sg = self.s[order], self.sigma[order]
        sig = np.empty(s.size)
        for i, t in enumerate(s):
            j = int(np.clip(np.searchsorted(ss, t), 1, len(ss) - 1))
            a, b = sg[j - 1], sg[j]
            fa, fb = ss[j - 1] - t, ss[j] - t
            if fa == 0.0 or fb == 0.0 or fa * fb > 0:
                sig[i] = a if abs(fa) <= abs(fb) else b
            else:
                sig[i] = brentq(lambda q: self.state_at_sigma(q)[3, 0] - t, a, b, xtol=1e-15)
        return self.state_at_sigma(sig)

    def resample(self, n: int) -> dict:
        """Evaluate the dense output on ``n`` points uniform in the internal parameter."""
        sig = np.linspace(self.sigma[0], self.sigma[-1], n)
        x, z, th, s = self.state_at_sigma(sig)
        nu = np.cos(th) / np.sqrt(1.0 + self.space.tau**2 * x**2)
        return {"s": s, "x": x, "z": z, "theta": th, "nu": nu,
                "eps": np.sign(np.sin(th)).astype(int)}


def _check_x(space, x):
    if not x > 0:
        raise DomainError(f"x = {x} <= 0 is the rotation axis; start with axis_start")


def rhs_angular(space: AmbientSpace, h: PrescribedH, state) -> tuple[float, float, float]:
    """Arc-length derivatives ``(x', z', theta')`` at an angular state."""
    x, th = (state.x, state.theta) if isinstance(state, AngularState) else (state[0], state[1])
    _check_x(space, x)
    k = space.kappa
    w = math.sqrt(1.0 + space.tau**2 * x * x)
    c, sn = math.cos(th), math.sin(th)
    b = 4.0 + k * x * x
    dth = (8.0 * eval_h(h, c / w) - (4.0 - k * x * x) / x * sn) / (b * w)
    return c / w, 4.0 * sn / b, dth


def rhs_phase(space: AmbientSpace, h: PrescribedH, eps: int, state: PhaseState | tuple):
    """The first-order phase system: ``(x', y')`` on the domain of sign ``eps``."""
    if isinstance(state, PhaseState):
        x, y, eps = state.x, state.y, state.eps
    else:
        x, y = state
    _check_x(space, x)
    k, t = space.kappa, space.tau
    rad = 1.0 - (1.0 + t * t * x * x) * y * y
    if rad < -1e-12:
        raise DomainError(f"({x}, {y}) lies outside the phase plane")
    rad = max(rad, 0.0)
    num = (4.0 - k * x * x - y * y * (4.0 - x * x * (k - 8.0 * t * t))
           - 8.0 * eps * x * eval_h(h, y) * math.sqrt(rad))
    return y, num / (x * (4.0 + k * x * x) * (1.0 + t * t * x * x))


def axis_start(space: AmbientSpace, h: PrescribedH, orientation: int = 1,
               s_seed: float = S_SEED) -> AngularState:
    """Regularized state a short arc away from the axis.

    Near the axis ``theta = h(1) s + O(s^3)`` and ``z = h(1) s^2 / 2 + O(s^4)``, so
    ``nu = 1 - (h(1)^2 + tau^2) s^2 / 2 + O(s^4)``.  Orientation -1 gives the
    reflected state (``nu`` near -1) meant to be integrated backward in ``s``.
    """
    h1 = eval_h(h, 1.0)
    th = h1 * s_seed
    z = 0.5 * h1 * s_seed * s_seed
    if orientation == 1:
        return AngularState(s_seed, s_seed, z, th)
    if orientation == -1:
        return AngularState(-s_seed, s_seed, -z, math.pi - th)
    raise ValueError("orientation must be +1 or -1")


def _make_rhs(space, h):
    k, t2 = space.kappa, space.tau**2

    def f(_sig, u):
        x, _z, th, _s = u
        sc = 1.0 + t2 * x * x
        w = math.sqrt(sc)
        c, sn = math.cos(th), math.sin(th)
        b = 4.0 + k * x * x
        nu = c / w
        if nu > 1.0:
            nu = 1.0
        elif nu < -1.0:
            nu = -1.0
        dth = (8.0 * eval_h(h, nu) - (4.0 - k * x * x) / x * sn) / (b * w)
        return np.array([c / w * sc, 4.0 * sn / b * sc, dth * sc, sc])

    return f


class _EventFn:
    """Scalar event function of the state ``[x, z, theta, s]``."""

    def __init__(self, name, g, terminal=False, restart=False):
        self.name, self.g, self.terminal, self.restart = name, g, terminal, restart


def integrate(space: AmbientSpace, h: PrescribedH, init: AngularState,
              stop: StopSpec | None = None, budget: Budget | None = None,
              direction: int = 1) -> Trajectory:
    """Integrate the angular system from ``init`` with event detection.

    Parameters
    ----------
    direction : {1, -1}
        Sign of the arc-length increment.

    Returns
    -------
    Trajectory
        ``status`` names the stop reason: one of ``"y0"``, ``"omega"``,
        ``"theta"``, ``"period"``, ``"axis"``, ``"escape"``, ``"wall"``,
        ``"budget"``, ``"events"``.
    """
    stop = stop or StopSpec()
    budget = budget or Budget()
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    _check_x(space, init.x)
    wall = space.wall_radius()
    x_max = budget.x_max if budget.x_max is not None else space.default_x_max()
    if wall is not None:
        x_max = min(x_max, 0.999 * wall)
    t2 = space.tau**2
    f = _make_rhs(space, h)

    def nu_of(u):
        return math.cos(u[2]) / math.sqrt(1.0 + t2 * u[0] * u[0])

    s0 = init.s
    ref_x, ref_nu, th_ref = init.x, init.nu(space), init.theta
    ref_dth = rhs_angular(space, h, init)[2]
    fns = [
        _EventFn("y0", lambda u: math.cos(u[2])),
        _EventFn("omega", lambda u: math.sin(u[2])),
        _EventFn("axis", lambda u: u[0] / budget.x_floor - 1.0, terminal=True),
        _EventFn("xmax", lambda u: u[0] / x_max - 1.0, terminal=True),
        _EventFn("smax", lambda u: abs(u[3] - s0) / budget.s_max - 1.0, terminal=True),
    ]
    for b in h.breakpoints():
        fns.append(_EventFn(f"bp{b}", lambda u, b=b: nu_of(u) ** 2 - b * b, restart=True))
    if stop.theta is not None:
        fns.append(_EventFn("theta", lambda u: u[2] - stop.theta, terminal=True))
    if stop.period_closure:
        fns.append(_EventFn("section", lambda u: math.sin(u[2] - th_ref)))

    u0 = np.array([init.x, init.z, init.theta, init.s], dtype=float)
    sig_bound = direction * 1e12
    nodes = [(0.0, u0.copy())]
    events: list[Event] = []
    segments = []
    counts = {"y0": 0, "omega": 0}
    status = None
    steps = 0
    sig, u = 0.0, u0

    while status is None:
        solver = DOP853(f, sig, u, sig_bound, rtol=budget.rtol, atol=budget.atol,
                        max_step=budget.max_step)
        g_prev = [fn.g(u) for fn in fns]
        # functions sitting on zero at a (re)start take their sign after the first step
        fresh = [abs(g) < 1e-12 for g in g_prev]
        restart = False
        while status is None and not restart:
            if steps >= budget.max_steps:
                raise IntegrationError(f"step budget {budget.max_steps} exhausted",
                                       last_state=_state(u))
            msg = solver.step()
            steps += 1
            if solver.status == "failed":
                raise IntegrationError(f"solver failed: {msg}", last_state=_state(u))
            t_old, t_new = solver.t_old, solver.t
            dense = solver.dense_output()
            u_new = solver.y.copy()
            g_new = [fn.g(u_new) for fn in fns]
            # scan interior points too: a band of h can be entered and left within one step
            ts = np.linspace(t_old, t_new, SCAN + 2)
            inner = dense(ts[1:-1])
            hits = []
            for i, fn in enumerate(fns):
                seq = [g_prev[i]] + [fn.g(inner[:, j]) for j in range(SCAN)] + [g_new[i]]
                first = 1 if fresh[i] else 0
                for j in range(first, SCAN + 1):
                    a, b = seq[j], seq[j + 1]
                    if a * b < 0 or (b == 0.0 and a != 0.0):
                        gi = fn.g
                        r = brentq(lambda t: gi(dense(t)), ts[j], ts[j + 1], xtol=1e-15,
                                   rtol=1e-15, maxiter=200) if b != 0.0 else ts[j + 1]
                        hits.append((direction * r, i, r))
                        break
            fresh = [False] * len(fns)
            hits.sort()
            cut = None
            for _, i, r in hits:
                if cut is not None and abs(r - cut[0]) > 1e-12 * max(1.0, abs(r)):
                    break
                ur = dense(r)
                fn = fns[i]
                name = fn.name
                th, x = ur[2], ur[0]
                nu = nu_of(ur)
                ev = None
                if name == "y0":
                    ev = Event("Y0Crossing", ur[3], x, ur[1], th, nu)
                    counts["y0"] += 1
                    if stop.y0_crossings is not None and counts["y0"] >= stop.y0_crossings:
                        status = "y0"
                elif name == "omega":
                    kind = "OmegaPlus" if math.cos(th) > 0 else "OmegaMinus"
                    ev = Event(kind, ur[3], x, ur[1], th, nu)
                    counts["omega"] += 1
                    if stop.omega_contacts is not None and counts["omega"] >= stop.omega_contacts:
                        status = "omega"
                elif name == "axis":
                    if abs(nu) <= 0.9:
                        raise IntegrationError(
                            f"orbit reached x = {x:.3g} with |nu| = {abs(nu):.3g}; "
                            "interior axis approach is impossible for admissible data",
                            last_state=_state(ur))
                    ev = Event("AxisContact", ur[3], x, ur[1], th, nu)
                    status = "axis"
                elif name == "xmax":
                    kind = "WallApproach" if wall is not None and x_max >= 0.999 * wall * (1 - 1e-12) \
                        else "EscapeXMax"
                    ev = Event(kind, ur[3], x, ur[1], th, nu)
                    status = "wall" if kind == "WallApproach" else "escape"
                elif name == "smax":
                    ev = Event("StallBudget", ur[3], x, ur[1], th, nu)
                    status = "budget"
                elif name == "theta":
                    ev = Event("ThetaTarget", ur[3], x, ur[1], th, nu)
                    status = "theta"
                elif name == "section":
                    dth = rhs_angular(space, h, _state(ur))[2]
                    close = (math.cos(th - th_ref) > 0 and np.sign(dth) == np.sign(ref_dth)
                             and abs(x - ref_x) < 1e-8 * max(1.0, ref_x)
                             and abs(nu - ref_nu) < 1e-8)
                    if close:
                        ev = Event("PeriodClosure", ur[3], x, ur[1], th, nu)
                        status = "period"
                elif fn.restart:
                    restart = True
                if ev is not None:
                    events.append(ev)
                    if len(events) >= budget.max_events and status is None:
                        status = "events"
                if (status is not None or restart) and cut is None:
                    cut = (r, ur)
            if cut is not None:
                t_new, u_new = cut
            segments.append((t_old, t_new, dense))
            nodes.append((t_new, np.asarray(u_new, dtype=float).copy()))
            sig, u = t_new, np.asarray(u_new, dtype=float)
            g_prev = g_new
            if solver.status == "finished" and status is None:
                status = "budget"

    arr = np.array([n[1] for n in nodes])
    return Trajectory(space, h, np.array([n[0] for n in nodes]), arr[:, 3], arr[:, 0],
                      arr[:, 1], arr[:, 2], events, status, direction, segments)


def _state(u) -> AngularState:
    return AngularState(float(u[3]), float(u[0]), float(u[1]), float(u[2]))


def second_derivatives(space: AmbientSpace, h: PrescribedH, x, theta):
    """``(x', z', x'', z'')`` in arc length, reconstructed from the vector field."""
    k, t2 = space.kappa, space.tau**2
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    sc = 1.0 + t2 * x * x
    w = np.sqrt(sc)
    c, sn = np.cos(theta), np.sin(theta)
    b = 4.0 + k * x * x
    nu = np.clip(c / w, -1.0, 1.0)
    dx = c / w
    dz = 4.0 * sn / b
    dth = (8.0 * np.asarray(eval_h(h, nu)) - (4.0 - k * x * x) / x * sn) / (b * w)
    ddx = -sn * dth / w - c * t2 * x * dx / w**3
    ddz = 4.0 * c * dth / b - 8.0 * k * x * dx * sn / b**2
    return dx, dz, ddx, ddz


def mean_curvature(space: AmbientSpace, x, dx, dz, ddx, ddz):
    """Mean curvature of the rotational surface with the given profile jet.

    Valid for any regular parametrization, including points where ``z' = 0``.
    """
    k, t2 = space.kappa, space.tau**2
    b = 4.0 + k * x * x
    num = b**2 * (dz**3 * (16.0 - k * k * x**4)
                  - 16.0 * dz * (t2 * x**3 * ddx + x * ddx - dx * dx)
                  + 16.0 * ddz * x * dx * (1.0 + t2 * x * x))
    den = 4.0 * x * (dz * dz * b**2 + 16.0 * dx * dx * (1.0 + t2 * x * x)) ** 1.5
    return 0.5 * num / den


def curvature_residual(space: AmbientSpace, h: PrescribedH, traj: Trajectory,
                       n_dense: int = 0) -> float:
    """Max of ``|H - h(nu)|`` over the trajectory nodes (and optional dense points)."""
    x, th = traj.x, traj.theta
    if n_dense:
        d = traj.resample(n_dense)
        x = np.concatenate([x, d["x"]])
        th = np.concatenate([th, d["theta"]])
    dx, dz, ddx, ddz = second_derivatives(space, h, x, th)
    H = mean_curvature(space, x, dx, dz, ddx, ddz)
    nu = np.clip(np.cos(th) / np.sqrt(1.0 + space.tau**2 * x * x), -1.0, 1.0)
    return float(np.max(np.abs(H - np.asarray(eval_h(h, nu)))))


def arc_length_residual(space: AmbientSpace, traj: Trajectory, per_segment: int = 2) -> float:
    """Max deviation of ``g(alpha', alpha') = 1`` using dense-output derivatives.

    Derivatives come from Richardson-extrapolated central differences of the
    interpolant inside each solver step, independent of the vector field.
    Segments shorter than ``1e-3`` (restarts beside a kink of ``h``) are
    skipped: their difference stencil is dominated by rounding.
    """
    worst = 0.0
    k, t2 = space.kappa, space.tau**2
    for a, b, dense in traj.segments:
        span = b - a
        if abs(span) < 1e-3:
            continue
        hstep = 0.05 * abs(span)
        for frac in np.linspace(0.3, 0.7, per_segment):
            t = a + frac * span

            def d1(hh):
                return (dense(t + hh) - dense(t - hh)) / (2.0 * hh)

            du = (4.0 * d1(hstep / 2) - d1(hstep)) / 3.0
            x = dense(t)[0]
            xs, zs = du[0] / du[3], du[1] / du[3]
            val = (1.0 + t2 * x * x) * xs * xs + (4.0 + k * x * x) ** 2 / 16.0 * zs * zs
            worst = max(worst, abs(val - 1.0))
    return worst


def phase_consistency(space: AmbientSpace, h: PrescribedH, traj: Trajectory) -> float:
    """Max mismatch between the angular flow projected to ``(x, nu)`` and the phase system.

    Compares ``d nu / ds`` from the angular system with the phase field at nodes
    away from the boundary curve.
    """
    t2 = space.tau**2
    worst = 0.0
    for x, th in zip(traj.x, traj.theta):
        sn = math.sin(th)
        if abs(sn) < 1e-3:
            continue
        dx, _dz, dth = rhs_angular(space, h, (x, th))
        w = math.sqrt(1.0 + t2 * x * x)
        dnu = -sn * dth / w - math.cos(th) * t2 * x * dx / w**3
        _, dy = rhs_phase(space, h, int(np.sign(sn)), (x, math.cos(th) / w))
        worst = max(worst, abs(dnu - dy) / max(1.0, abs(dy)))
    return worst
