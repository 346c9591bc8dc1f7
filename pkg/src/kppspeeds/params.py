"""Model parameters, regime tags and result containers shared by all solvers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InfeasibleError(RuntimeError):
    """A solver found no admissible solution (e.g. extinction regime)."""


class UnsupportedDimensionError(RuntimeError):
    """The requested dimension is outside the range the construction covers."""


class InstabilityError(RuntimeError):
    """A time integration blew up; carries the violated CFL diagnostic."""


class ConfigError(ValueError):
    """A run configuration failed validation."""


class Regime(enum.Enum):
    """Which closed form the interface spreading speed takes."""

    FISHER = "fisher"
    INTERIOR = "interior"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class Params:
    """Constants of the coupled two-density model.

    ``u`` diffuses with ``D`` and grows with slope ``gp = g'(0)`` inside the
    favorable region (a half-space, or the cylinder of radius ``R``); ``v``
    diffuses with ``d`` outside.  The exterior reaction is either KPP with
    slope ``fp = f'(0)`` and carrying capacity ``S``, or a linear mortality
    ``-rho * v`` (set ``rho`` and leave ``fp`` as ``None``).  ``mu`` is the
    exchange rate out of the favorable region, ``nu`` the rate into it.
    """

    D: float
    d: float
    gp: float
    fp: float | None = None
    rho: float | None = None
    mu: float = 1.0
    nu: float = 1.0
    R: float = 1.0
    S: float = 1.0
    N: int = 2

    def __post_init__(self) -> None:
        for name in ("D", "d", "gp", "mu", "nu", "R", "S"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be a positive finite number, got {val!r}")
        if (self.fp is None) == (self.rho is None):
            raise DomainError("exactly one of fp (KPP exterior) and rho (mortality) must be set")
        if self.fp is not None and not self.fp > 0:
            raise DomainError(f"fp must be positive for a KPP exterior, got {self.fp!r}")
        if self.rho is not None and not self.rho > 0:
            raise DomainError(f"rho must be positive for a mortality exterior, got {self.rho!r}")
        if not (isinstance(self.N, int) and 2 <= self.N <= 103):
            raise DomainError(f"N must be an integer in [2, 103], got {self.N!r}")

    @property
    def mortality(self) -> bool:
        return self.rho is not None

    @property
    def tau(self) -> float:
        """Radial Bessel order of the cylinder cross-section."""
        return (self.N - 3) / 2.0

    @property
    def c_g(self) -> float:
        """Fisher-KPP speed of the interior medium alone."""
        return 2.0 * math.sqrt(self.D * self.gp)

    @property
    def c_f(self) -> float:
        """Fisher-KPP speed of the exterior medium alone (KPP exterior only)."""
        if self.fp is None:
            raise DomainError("c_f is undefined for a mortality exterior")
        return 2.0 * math.sqrt(self.d * self.fp)

    def require_kpp(self) -> None:
        if self.mortality:
            raise DomainError("this operation requires a KPP exterior (fp set)")

    def require_mortality(self) -> None:
        if not self.mortality:
            raise DomainError("this operation requires a mortality exterior (rho set)")


def logistic(slope: float, cap: float = 1.0) -> Callable[[float], float]:
    """Logistic reaction ``slope * s * (1 - s/cap)``; the default nonlinearity."""

    def g(s):
        return slope * s * (1.0 - s / cap)

    return g


@dataclass(frozen=True)
class SpeedResult:
    """A spreading speed together with how it was classified and located."""

    c: float
    regime: Regime | None = None
    witness: tuple[float, float] | None = None  # (beta, alpha) contact point
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TangencyResult:
    """Speed from the curve-tangency construction on the cylinder geometry."""

    c_star: float
    beta_star: float
    alpha_star: float
    enhanced: bool
    branch: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def c(self) -> float:
        return self.c_star

    @property
    def witness(self) -> tuple[float, float]:
        return (self.beta_star, self.alpha_star)


@dataclass(frozen=True)
class SteadyProfile:
    """Sampled stationary profile of the coupled half-space (or strip) system.

    ``y_u``/``U`` sample the interior side (non-positive coordinates up to the
    interface at 0), ``y_v``/``V`` the exterior side.  ``branch`` records the
    trichotomy case: "decreasing", "constant" or "increasing".
    """

    U0: float
    V0: float
    dU0: float
    y_u: np.ndarray
    U: np.ndarray
    y_v: np.ndarray
    V: np.ndarray
    flux_residual: float
    branch: str


@dataclass(frozen=True)
class EigenResult:
    """Principal Robin eigenvalue data for the mortality problem."""

    beta0: float
    kappa: float
    survives: bool
    residual: float


@dataclass(frozen=True)
class RadialSteady:
    """Radial steady state of the cylinder-with-mortality system."""

    a0: float
    gamma_ext: float
    r_in: np.ndarray
    phi: np.ndarray
    r_out: np.ndarray
    psi: np.ndarray
    robin_residual: float
