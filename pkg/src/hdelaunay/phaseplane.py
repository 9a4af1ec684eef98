"""Closed-form geometry of the phase plane (x, y).

Here ``x`` is the distance to the rotation axis and ``y`` the angle function.
The plane splits into a height-increasing domain (``eps = 1``) and a
height-decreasing one (``eps = -1``); both are bounded by the boundary curve
``y^2 (1 + tau^2 x^2) = 1``, whose upper and lower halves name the
``OmegaPlus`` and ``OmegaMinus`` events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ambient import AmbientSpace
from .errors import DomainError
from .prescribed import PrescribedH, eval_h

SLACK = 1e-12


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    eps: int

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise DomainError(f"eps must be +1 or -1, got {self.eps}")


@dataclass(frozen=True)
class Equilibrium:
    x: float
    eps: int


@dataclass(frozen=True)
class RegionInfo:
    side_of_gamma: str  # "left", "right", "on-curve" or "no-curve"
    sign_dx: int
    sign_dy: int


def omega_y(space: AmbientSpace, x):
    """Upper half of the boundary curve at radius ``x``."""
    return 1.0 / np.sqrt(1.0 + space.tau**2 * np.asarray(x, dtype=float) ** 2)


def in_phase_plane(space: AmbientSpace, x: float, y: float) -> bool:
    """Strict interior test with a small slack toward the interior."""
    if not (x > 0 and x < space.x_sup()):
        return False
    return y * y * (1.0 + space.tau**2 * x * x) < 1.0 - SLACK


def raw_gamma_value(space: AmbientSpace, h: PrescribedH, eps: int, y: float) -> float | None:
    """Closed-form nullcline value, ignoring whether it lies in the phase plane.

    Returns None only where the formula itself is undefined.
    """
    k, t = space.kappa, space.tau
    hv = eval_h(h, y)
    w = 1.0 - y * y
    inner = 4.0 * hv * hv + k * w + 4.0 * t * t * y * y
    if inner < 0:
        return None
    p = k * w + 8.0 * t * t * y * y
    a = p + 8.0 * hv * hv
    b = 4.0 * hv * math.sqrt(inner)
    if eps == 1 or a + b <= 0:
        den = a + eps * b
    else:
        # a - b rationalized; the direct difference cancels badly for large x
        den = (p * p + 64.0 * hv * hv * t * t * y * y) / (a + b)
    if not den > 0 or w < 0:
        return None
    return 2.0 * math.sqrt(w / den)


def gamma_curve(space: AmbientSpace, h: PrescribedH, eps: int, y: float) -> float | None:
    """Point of the nullcline of ``y`` in the ``eps`` domain at height ``y``, if any."""
    x = raw_gamma_value(space, h, eps, y)
    if x is None or not in_phase_plane(space, x, y):
        return None
    return x


def equilibrium(space: AmbientSpace, h: PrescribedH, eps: int) -> Equilibrium | None:
    """Fixed points on ``y = 0``: e_0 always, e_-1 only when kappa > 0."""
    h0 = eval_h(h, 0.0)
    r = math.sqrt(4.0 * h0 * h0 + space.kappa)
    if eps == 1:
        return Equilibrium(2.0 / (r + 2.0 * h0), 1)
    if space.kappa > 0:
        return Equilibrium(2.0 / (r - 2.0 * h0), -1)
    return None


def crossing_poly(space: AmbientSpace, h: PrescribedH, eps: int, x):
    """The parabolas ``4 - x(8 h0 + kappa x)`` (eps = 1) and ``4 + x(8 h0 - kappa x)``."""
    h0 = eval_h(h, 0.0)
    x = np.asarray(x, dtype=float)
    return 4.0 - x * (8.0 * eps * h0 + space.kappa * x)


def y0_crossing_direction(space: AmbientSpace, h: PrescribedH, eps: int, x0: float) -> int:
    """Sign of ``y'`` for the orbit through ``(x0, 0)`` in the ``eps`` domain."""
    space.check_x(x0)
    e = equilibrium(space, h, eps)
    if e is not None and abs(x0 - e.x) <= 1e-12 * e.x:
        return 0
    return int(np.sign(crossing_poly(space, h, eps, x0)))


def _dy_numerator(space, h, eps, x, y):
    k, t = space.kappa, space.tau
    rad = max(1.0 - (1.0 + t * t * x * x) * y * y, 0.0)
    terms = (4.0, -k * x * x, -y * y * (4.0 - x * x * (k - 8.0 * t * t)),
             -8.0 * eps * x * eval_h(h, y) * math.sqrt(rad))
    return sum(terms), max(abs(v) for v in terms)


def region_classify(space: AmbientSpace, h: PrescribedH, state: PhaseState) -> RegionInfo:
    """Monotonicity signs of an interior phase state and its side of the nullcline."""
    x, y, eps = state.x, state.y, state.eps
    if not in_phase_plane(space, x, y):
        raise DomainError(f"({x}, {y}) is not an interior phase state")
    g = gamma_curve(space, h, eps, y)
    num, scale = _dy_numerator(space, h, eps, x, y)
    on = abs(num) <= 1e-12 * scale
    if g is None:
        side = "no-curve"
    elif on or abs(x - g) <= 1e-12 * g:
        side, on = "on-curve", True
    else:
        side = "left" if x < g else "right"
    sign_dy = 0 if on else int(np.sign(num))
    return RegionInfo(side, int(np.sign(y)), sign_dy)
