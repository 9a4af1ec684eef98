"""The homogeneous spaces E(kappa, tau) in the rotational coordinate model.

The model carries coordinates (x, y, z) with x, y horizontal and z along the
fibres.  Only data needed by rotational surfaces is exposed: the metric of the
orbit plane {y = 0}, the admissible range of the distance-to-axis x, and the
embedding of the model into the Berger sphere when kappa > 0 and tau > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedSpaceError


@dataclass(frozen=True)
class AmbientSpace:
    """The space E(kappa, tau).

    Parameters
    ----------
    kappa : float
        Curvature of the base surface.
    tau : float
        Bundle curvature, ``tau >= 0``.
    degenerate_ok : bool
        Admit the space forms ``kappa == 4 tau^2`` (e.g. Euclidean space).
        Only meant for closed-form oracles.
    """

    kappa: float
    tau: float
    degenerate_ok: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and math.isfinite(self.tau)):
            raise DomainError("kappa and tau must be finite")
        if self.tau < 0:
            raise DomainError(f"tau must be >= 0, got {self.tau}")
        if not self.degenerate_ok and self.kappa == 4.0 * self.tau**2:
            raise DomainError(
                f"kappa = 4 tau^2 = {self.kappa} is a space form; pass degenerate_ok=True"
            )

    @property
    def name(self) -> str:
        k, t = self.kappa, self.tau
        if self.kappa == 4.0 * self.tau**2:
            return "space-form"
        if t == 0:
            return {True: "S2xR", False: "H2xR"}[k > 0]
        if k == 0:
            return "Nil3"
        return "Berger" if k > 0 else "SL2"

    def wall_radius(self) -> float | None:
        """Boundary ``2/sqrt(-kappa)`` of the disk model when kappa < 0."""
        if self.kappa < 0:
            return 2.0 / math.sqrt(-self.kappa)
        return None

    def x_sup(self) -> float:
        """Supremum of the admissible distance to the axis."""
        w = self.wall_radius()
        return math.inf if w is None else w

    def check_x(self, x: float) -> None:
        if not x > 0 or not x < self.x_sup():
            raise DomainError(f"x = {x} outside the model x-domain (0, {self.x_sup()})")

    def default_x_max(self) -> float:
        """Escape budget used by integrations unless overridden."""
        if self.kappa > 0:
            return 50.0 / math.sqrt(self.kappa)
        if self.kappa < 0:
            return 0.999 * self.wall_radius()
        return 1.0e3

    def to_dict(self) -> dict:
        d = {"kappa": self.kappa, "tau": self.tau}
        if self.degenerate_ok:
            d["degenerate_ok"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AmbientSpace":
        return cls(float(d["kappa"]), float(d["tau"]), bool(d.get("degenerate_ok", False)))


def metric_coeffs(space: AmbientSpace, x: float) -> tuple[float, float]:
    """Coefficients ``(g_xx, g_zz)`` of the orbit-plane metric.

    ``ds^2 = (1 + tau^2 x^2) dx^2 + (4 + kappa x^2)^2 / 16 dz^2``.
    """
    space.check_x(x)
    gxx = 1.0 + space.tau**2 * x * x
    gzz = (4.0 + space.kappa * x * x) ** 2 / 16.0
    return gxx, gzz


def vertical_period(space: AmbientSpace) -> float | None:
    """Fibre length ``8 tau pi / kappa`` after which Berger points repeat."""
    if space.kappa > 0 and space.tau > 0:
        return 8.0 * space.tau * math.pi / space.kappa
    return None


def berger_embed(space: AmbientSpace, p) -> np.ndarray:
    """Map model points into the unit sphere of C^2 = R^4.

    Parameters
    ----------
    space : AmbientSpace
        Must have kappa > 0 and tau > 0.
    p : array_like, shape (3,) or (n, 3)
        Model coordinates (x, y, z).

    Returns
    -------
    ndarray, shape (4,) or (n, 4)
        ``(Re v, Im v, Re w, Im w)``.
    """
    if not (space.kappa > 0 and space.tau > 0):
        raise UnsupportedSpaceError("Berger embedding needs kappa > 0 and tau > 0")
    p = np.asarray(p, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    k = space.kappa
    norm = 1.0 / np.sqrt(1.0 + 0.25 * k * (x * x + y * y))
    phase = np.exp(1j * k * z / (4.0 * space.tau))
    v = norm * 0.5 * math.sqrt(k) * (x + 1j * y) * phase
    w = norm * phase
    return np.stack([v.real, v.imag, w.real, w.imag], axis=-1)
