"""Height gap of nodoid arcs and the search for rotational tori.

A nodoid arc is followed in the angle parametrization from its upper boundary
contact ``(x1, theta = pi)``: backward to the outer crossing ``theta = pi/2``
(the ascent, of height ``I2``) and forward to the inner crossing
``theta = 3 pi/2`` (the descent, of height ``I1``).  The full profile closes
up exactly when ``I2 = I1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from .ambient import AmbientSpace
from .classifier import Nodoid, trace_nodoid
from .errors import ArcDegeneracyError, SearchFailure, SpecError, UnsupportedSpaceError
from .integrator import AngularState, Budget, StopSpec, integrate
from .prescribed import ConstantH, PrescribedH, StepFamilySpec, eval_dh, eval_h, make_step_family

GAP_RTOL = 1e-12
GAP_ATOL = 1e-14


@dataclass
class TorusGapResult:
    I1: float
    I2: float
    gap: float
    theta_hat: float
    nu_min: float
    x_outer: float
    x_inner: float


def _require_regime(space: AmbientSpace):
    if not (space.kappa <= 0 and space.tau > 0):
        raise UnsupportedSpaceError("the gap functional is set up for kappa <= 0 and tau > 0; "
                                    "use the classifier for kappa > 0")


def _theta_rhs(space, h):
    k, t2 = space.kappa, space.tau**2

    def f(th, u):
        x = u[0]
        if not x > 0:
            raise ArcDegeneracyError(f"arc reaches the axis at theta = {th:.6g}")
        w = math.sqrt(1.0 + t2 * x * x)
        sn = math.sin(th)
        b = 4.0 + k * x * x
        nu = max(-1.0, min(1.0, math.cos(th) / w))
        den = 8.0 * eval_h(h, nu) - (4.0 - k * x * x) / x * sn
        if not den > 0:
            raise ArcDegeneracyError(f"theta' <= 0 at theta = {th:.6g}, x = {x:.6g}")
        return [math.cos(th) * b / den, 4.0 * sn * w / den]

    return f


def _theta_leg(space, h, x1, th_end):
    """Integrate ``(x, z)`` in theta from ``(x1, 0)`` at ``pi`` to ``th_end``, restarting at kinks."""
    f = _theta_rhs(space, h)
    t2 = space.tau**2
    bps = h.breakpoints()

    def mk(b):
        def ev(th, u):
            return (math.cos(th) ** 2 / (1.0 + t2 * u[0] ** 2)) - b * b
        ev.terminal = True
        return ev

    th, u = math.pi, np.array([x1, 0.0])
    dense = []
    while True:
        evs = [mk(b) for b in bps]
        sol = solve_ivp(f, (th, th_end), u, method="DOP853", rtol=GAP_RTOL, atol=GAP_ATOL,
                        max_step=0.01, dense_output=True, events=evs or None)
        if sol.status == -1:
            raise ArcDegeneracyError(f"theta integration failed: {sol.message}")
        dense.append((sol.t[0], sol.t[-1], sol.sol))
        th, u = sol.t[-1], sol.y[:, -1]
        if sol.status == 0:
            return u, dense
        # nudge past the kink so the event does not refire at the restart point
        step = 1e-13 * (1 if th_end > th else -1)
        if abs(th_end - th) <= abs(step):
            return u, dense
        u = u + np.array(f(th, u)) * step
        th = th + step


def torus_gap(space: AmbientSpace, h: PrescribedH, x1: float) -> TorusGapResult:
    """Ascent and descent heights of the nodoid arc with boundary contact at ``x1``.

    Raises
    ------
    ArcDegeneracyError
        If the angle fails to be strictly increasing along the arc.
    """
    _require_regime(space)
    space.check_x(x1)
    (xo, zo), _ = _theta_leg(space, h, x1, 0.5 * math.pi)
    (xi, zi), dense = _theta_leg(space, h, x1, 1.5 * math.pi)
    I2 = -zo
    I1 = -zi
    # minimum of nu on the descent
    t2 = space.tau**2

    def nu_at(th):
        for a, b, d in dense:
            if min(a, b) - 1e-15 <= th <= max(a, b) + 1e-15:
                return math.cos(th) / math.sqrt(1.0 + t2 * d(th)[0] ** 2)
        return math.cos(th) / math.sqrt(1.0 + t2 * dense[-1][2](th)[0] ** 2)

    grid = np.linspace(math.pi, 1.5 * math.pi, 401)
    vals = np.array([nu_at(t) for t in grid])
    j = int(np.argmin(vals))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    r = minimize_scalar(nu_at, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return TorusGapResult(I1, I2, I2 - I1, float(r.x), float(r.fun), float(xo), float(xi))


def gap_by_arclength(space: AmbientSpace, h: PrescribedH, x1: float,
                     budget: Budget | None = None) -> float:
    """The same height gap from the arc-length system: ``z(3 pi/2) - z(pi/2)``."""
    init = AngularState(0.0, x1, 0.0, math.pi)
    up = integrate(space, h, init, StopSpec(theta=0.5 * math.pi), budget, direction=-1)
    down = integrate(space, h, init, StopSpec(theta=1.5 * math.pi), budget)
    if up.status != "theta" or down.status != "theta":
        raise ArcDegeneracyError(f"arc did not reach the y = 0 crossings ({up.status}, {down.status})")
    return down.final.z - up.final.z


def nonexistence_check(h: PrescribedH, n: int = 4097) -> bool:
    """True when ``h`` is non-increasing on [-1, 0], which rules out tori."""
    y = np.linspace(-1.0, 0.0, n)[1:-1]
    return bool(np.all(np.asarray(eval_dh(h, y)) <= 1e-12))


@dataclass
class TorusSearchResult:
    lambda0: float
    gap: float
    I1: float
    I2: float
    nu0: float
    delta: float
    x1: float
    nu_min_reference: float
    brackets: list[tuple[float, float]]
    nodoid: Nodoid = field(repr=False)

    def to_dict(self):
        return {"lambda0": self.lambda0, "gap": self.gap, "I1": self.I1, "I2": self.I2,
                "nu0": self.nu0, "delta": self.delta, "x1": self.x1,
                "nu_min_reference": self.nu_min_reference,
                "brackets": [list(b) for b in self.brackets],
                "closure_residual": self.nodoid.closure_residual,
                "closes": self.nodoid.closes}


def step_family_for(space: AmbientSpace, H0: float, lam: float, x1: float,
                    delta: float) -> PrescribedH:
    nu0 = -1.0 / math.sqrt(1.0 + space.tau**2 * x1 * x1)
    return make_step_family(StepFamilySpec(H0, lam, nu0, delta))


def find_torus(space: AmbientSpace, H0: float, x1: float, delta: float,
               lambda_max: float | None = None, tol: float = 1e-9,
               closure_tol: float = 1e-6) -> TorusSearchResult:
    """Find a plateau height ``lambda0`` whose nodoid closes into a torus.

    The prescribed function equals ``lambda`` for ``|y| <= -nu0`` and ``H0``
    outside the transition bands, with ``nu0 = -1/sqrt(1 + tau^2 x1^2)``.
    ``lambda`` doubles from ``H0`` until the gap changes sign, then the
    crossing is refined until ``|gap| < tol``.

    Raises
    ------
    SpecError
        If the reference arc (constant ``H0``) does not dip below ``nu0 - delta``.
    SearchFailure
        If no sign change is found below ``lambda_max``; the report lists every
        ``(lambda, gap)`` evaluated.
    """
    _require_regime(space)
    lambda_max = 1e3 * H0 if lambda_max is None else lambda_max
    nu0 = -1.0 / math.sqrt(1.0 + space.tau**2 * x1 * x1)
    ref = torus_gap(space, ConstantH(H0), x1)
    if not ref.nu_min < nu0 - delta:
        raise SpecError(f"band too wide: the reference arc reaches nu_min = {ref.nu_min:.6g}, "
                        f"not below nu0 - delta = {nu0 - delta:.6g} (nu0 = {nu0:.6g}, "
                        f"delta = {delta:g})")
    brackets: list[tuple[float, float]] = [(H0, ref.gap)]

    def gap(lam):
        g = torus_gap(space, step_family_for(space, H0, lam, x1, delta), x1).gap
        brackets.append((lam, g))
        return g

    lo, hi = H0, None
    lam = 2.0 * H0
    while lam <= lambda_max:
        try:
            g = gap(lam)
        except ArcDegeneracyError as exc:
            raise SearchFailure(f"arc degenerates at lambda = {lam}: {exc}",
                                {"brackets": brackets}) from exc
        if g < 0:
            hi = lam
            break
        lo = lam
        lam *= 2.0
    if hi is None:
        raise SearchFailure(f"gap stays positive up to lambda = {lambda_max}",
                            {"brackets": brackets})
    lam0 = brentq(gap, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=200)
    res = torus_gap(space, step_family_for(space, H0, lam0, x1, delta), x1)
    if not abs(res.gap) < tol:
        raise SearchFailure(f"refined gap {res.gap:.3g} above tolerance {tol:g}",
                            {"brackets": brackets, "lambda0": lam0})
    h0 = step_family_for(space, H0, lam0, x1, delta)
    nod = trace_nodoid(space, h0, res.x_outer, Budget(rtol=1e-12, atol=1e-14),
                       closure_tol=closure_tol)
    return TorusSearchResult(lam0, res.gap, res.I1, res.I2, nu0, delta, x1, ref.nu_min,
                             brackets, nod)
