"""Prescribed mean curvature functions of the angle function.

Every function here is even in ``y`` by construction: the table and step
kinds only ever look at ``|y|``.  Evaluation is vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .ambient import AmbientSpace
from .errors import DomainError, SpecError

CLAMP = 1e-12


def _abs_clamped(y):
    y = np.asarray(y, dtype=float)
    u = np.abs(y)
    if np.any(u > 1.0 + CLAMP) or np.any(np.isnan(u)):
        bad = float(np.max(u)) if u.size else float("nan")
        raise DomainError(f"angle function value |y| = {bad} outside [-1, 1]")
    return np.minimum(u, 1.0)


class PrescribedH:
    """Base class. Subclasses implement ``_f(u)`` and ``_df(u)`` for ``u = |y|``."""

    kind = "abstract"

    def __call__(self, y):
        return eval_h(self, y)

    def _f(self, u):
        raise NotImplementedError

    def _df(self, u):
        raise NotImplementedError

    def _f1(self, u: float) -> float:
        return float(self._f(np.asarray(u)))

    def breakpoints(self) -> tuple[float, ...]:
        """Values of ``|y|`` in (0, 1) where the second derivative may jump."""
        return ()

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantH(PrescribedH):
    H0: float
    kind = "constant"

    def _f(self, u):
        return np.full_like(u, self.H0, dtype=float)

    def _f1(self, u):
        return self.H0

    def _df(self, u):
        return np.zeros_like(u, dtype=float)

    def to_dict(self):
        return {"kind": "constant", "H0": self.H0}


@dataclass(frozen=True, eq=False)
class TableH(PrescribedH):
    """Monotone-preserving cubic through knots ``(u_i, h_i)`` with ``u`` in [0, 1].

    The slope at ``u = 0`` is forced to zero so the even extension is C^1.
    """

    knots: tuple[tuple[float, float], ...]
    _spline: CubicHermiteSpline = field(init=False, repr=False, compare=False)
    kind = "table"

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 2 or k.shape[1] != 2 or len(k) < 2:
            raise SpecError("table needs at least two (y, h) knots")
        u, h = k[:, 0], k[:, 1]
        if u[0] != 0.0 or u[-1] != 1.0 or np.any(np.diff(u) <= 0):
            raise SpecError("table knots must increase strictly from y=0 to y=1")
        slopes = PchipInterpolator(u, h).derivative()(u)
        slopes[0] = 0.0
        object.__setattr__(self, "knots", tuple(map(tuple, k.tolist())))
        object.__setattr__(self, "_spline", CubicHermiteSpline(u, h, slopes))

    def _f(self, u):
        return self._spline(u)

    def _df(self, u):
        return self._spline(u, 1)

    def breakpoints(self):
        return tuple(u for u, _ in self.knots[1:-1])

    def to_dict(self):
        return {"kind": "table", "knots": [list(p) for p in self.knots]}


@dataclass(frozen=True)
class StepFamilySpec:
    """Plateau data: ``H0`` outside, ``lam`` on ``|y| <= -nu0``, bands of width ``delta``."""

    H0: float
    lam: float
    nu0: float
    delta: float


@dataclass(frozen=True)
class StepH(PrescribedH):
    spec: StepFamilySpec
    kind = "step"

    def _f(self, u):
        s = self.spec
        a = -s.nu0
        t = np.clip((u - a) / s.delta, 0.0, 1.0)
        return s.lam + (s.H0 - s.lam) * t * t * (3.0 - 2.0 * t)

    def _f1(self, u):
        s = self.spec
        t = (u + s.nu0) / s.delta
        if t <= 0.0:
            return s.lam
        if t >= 1.0:
            return s.H0
        return s.lam + (s.H0 - s.lam) * t * t * (3.0 - 2.0 * t)

    def _df(self, u):
        s = self.spec
        a = -s.nu0
        t = np.clip((u - a) / s.delta, 0.0, 1.0)
        return (s.H0 - s.lam) * 6.0 * t * (1.0 - t) / s.delta

    def breakpoints(self):
        a = -self.spec.nu0
        return (a, a + self.spec.delta)

    def to_dict(self):
        s = self.spec
        return {"kind": "step", "H0": s.H0, "lambda": s.lam, "nu0": s.nu0, "delta": s.delta}


def eval_h(h: PrescribedH, y):
    """Evaluate the prescribed function; scalar in, float out."""
    if type(y) is float:
        u = abs(y)
        if u <= 1.0:
            return h._f1(u)
        if u <= 1.0 + CLAMP:
            return h._f1(1.0)
    u = _abs_clamped(y)
    out = h._f(u)
    return float(out) if np.ndim(out) == 0 else out


def eval_dh(h: PrescribedH, y):
    """Derivative with respect to ``y`` (odd in ``y``)."""
    y = np.asarray(y, dtype=float)
    u = _abs_clamped(y)
    out = np.sign(y) * h._df(u)
    return float(out) if np.ndim(out) == 0 else out


def make_step_family(spec: StepFamilySpec) -> PrescribedH:
    """Build the plateau family; ``lam == H0`` collapses to a constant."""
    if not spec.H0 > 0:
        raise SpecError(f"H0 must be positive, got {spec.H0}")
    if spec.lam < spec.H0:
        raise SpecError(f"lambda = {spec.lam} must be >= H0 = {spec.H0}")
    if not -1.0 < spec.nu0 < 0.0:
        raise SpecError(f"nu0 = {spec.nu0} must lie in (-1, 0)")
    if not spec.delta > 0:
        raise SpecError(f"delta must be positive, got {spec.delta}")
    if spec.nu0 - spec.delta <= -1.0:
        raise SpecError(f"transition band leaves [-1, 1]: nu0 - delta = {spec.nu0 - spec.delta}")
    if spec.lam == spec.H0:
        return ConstantH(spec.H0)
    return StepH(spec)


@dataclass
class Violation:
    y: float
    clause: str
    margin: float


@dataclass
class ValidationReport:
    ok: bool
    min_h: float
    min_bound: float
    argmin_bound: float
    violations: list[Violation]

    def to_dict(self):
        return {
            "ok": self.ok,
            "min_h": self.min_h,
            "min_bound": self.min_bound,
            "argmin_bound": self.argmin_bound,
            "violations": [vars(v) for v in self.violations],
        }


def lobatto_points(n: int = 4097) -> np.ndarray:
    """Chebyshev-Lobatto points on [-1, 1], exact at -1, 0 (odd n) and 1."""
    k = np.arange(n) - (n - 1) / 2
    return np.sin(np.pi * k / (n - 1))


def validate_c1(h: PrescribedH, space: AmbientSpace, n: int = 4097,
                max_report: int = 20) -> ValidationReport:
    """Sample ``h > 0`` and ``4 h^2 + kappa (1 - y^2) > 0`` on [-1, 1].

    Never raises; violations are listed with their ``y`` and margin.
    """
    y = lobatto_points(n)
    try:
        hv = np.asarray(eval_h(h, y), dtype=float)
    except Exception as exc:  # noqa: BLE001 - validation reports, never throws
        return ValidationReport(False, math.nan, math.nan, math.nan,
                                [Violation(math.nan, f"evaluation failed: {exc}", math.nan)])
    bound = 4.0 * hv**2 + space.kappa * (1.0 - y**2)
    viol = []
    for clause, margin in (("positivity", hv), ("critical-bound", bound)):
        bad = np.flatnonzero(~(margin > 0))
        bad = bad[np.argsort(margin[bad], kind="stable")]
        for i in bad[:max_report]:
            viol.append(Violation(float(y[i]), clause, float(margin[i])))
    j = int(np.argmin(bound))
    return ValidationReport(not viol, float(np.min(hv)), float(bound[j]), float(y[j]), viol)


def h_from_dict(d: dict) -> PrescribedH:
    kind = d.get("kind")
    try:
        if kind == "constant":
            return ConstantH(float(d["H0"]))
        if kind == "table":
            return TableH(tuple((float(a), float(b)) for a, b in d["knots"]))
        if kind == "step":
            return make_step_family(StepFamilySpec(float(d["H0"]), float(d["lambda"]),
                                                   float(d["nu0"]), float(d["delta"])))
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed {kind} spec: {exc}") from exc
    raise SpecError(f"unknown prescribed-function kind {kind!r}")


def h_to_dict(h: PrescribedH) -> dict:
    return h.to_dict()
