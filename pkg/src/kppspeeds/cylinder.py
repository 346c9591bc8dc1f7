"""Spreading speed for the cylinder/complement geometry via curve tangency.

Axially symmetric exponential modes of the linearized system exist exactly
when the hyperbola

    alpha_D^(+/-)(c, beta) = (c +/- sqrt(c^2 - c_g^2 + 4 D^2 beta^2)) / (2D)

meets the deformed arc

    alpha_d^(+/-)(c, beta) = (c +/- sqrt(c^2 - c_f^2 - 4 d^2 delta(beta)^2)) / (2d),

where the exterior decay ``delta(beta)`` is matched through the exchange
condition ``chi_v(delta) = chi_u(beta)`` built from the Bessel ratio maps.
The spreading speed is the smallest ``c`` at which the two regions between
the branches intersect; the contact is tangential for ``N <= 5``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._rootfind import bracket_root, golden_min, smallest_true
from .params import (
    DomainError,
    Params,
    Regime,
    SpeedResult,
    TangencyResult,
    UnsupportedDimensionError,
)
from .halfspace import classify_kpp, speed_halfspace
from .specfun import bessel_j, bessel_k, first_zero_j, h_u, h_v, k_u, k_v

CHI_CAP = 1e15
DELTA_CAP = 1e8


@dataclass(frozen=True)
class DispersionCurves:
    """Exchange-matched curve data for one parameter set.

    ``delta`` maps the interior transverse frequency ``beta`` in
    ``(beta_under, beta_bar)`` to the exterior radial decay; it is strictly
    increasing from 0 to +infinity (capped at ``DELTA_CAP``).
    """

    p: Params
    tau: float
    beta_bar: float
    beta_under: float
    chi_u: Callable[[np.ndarray], np.ndarray]
    delta: Callable[[np.ndarray], np.ndarray]
    gamma: Callable[[float], float]
    mu: float  # exchange rate actually used (supports the rescaled variants)

    def beta_hat(self, c: float) -> float:
        """Left endpoint of the interior hyperbola domain at speed ``c``."""
        p = self.p
        if c >= p.c_g:
            return 0.0
        return math.sqrt(p.gp / p.D - c * c / (4.0 * p.D * p.D))

    def beta_breve(self, delta_target: float) -> float:
        """The ``beta`` at which ``delta(beta)`` reaches ``delta_target``.

        The inversion factors through the ratio maps: delta = target exactly
        when chi_u(beta) equals chi_v(target), which pins h_u(beta R) in
        closed form, so a single k_u inversion suffices.
        """
        p = self.p
        if delta_target <= 0.0:
            return self.beta_under
        w = p.d / p.R * h_v(self.tau, delta_target * p.R)  # chi_v(target)
        arg = self.mu * p.R * w / (p.D * (p.nu + w))
        hi = self.beta_bar * (1.0 - 1e-13)
        return min(k_u(self.tau, arg) / p.R, hi)

    def alpha_D(self, c: float, beta) -> tuple[np.ndarray, np.ndarray]:
        p = self.p
        arg = c * c - p.c_g**2 + 4.0 * p.D * p.D * np.asarray(beta) ** 2
        root = np.sqrt(np.maximum(arg, 0.0))
        lo = np.where(arg >= 0, (c - root) / (2 * p.D), np.nan)
        hi = np.where(arg >= 0, (c + root) / (2 * p.D), np.nan)
        return lo, hi


def build_curves(p: Params, *, mu: float | None = None) -> DispersionCurves:
    """Assemble the exchange-matched dispersion data for parameters ``p``.

    ``mu`` overrides the exchange rate out of the cylinder (used by the
    shrinking-radius rescalings); defaults to ``p.mu``.
    """
    tau = p.tau
    if tau > 50.0:
        raise DomainError(f"dimension N={p.N} exceeds the supported order grid")
    mu_eff = p.mu if mu is None else float(mu)
    if mu_eff <= 0:
        raise DomainError("exchange rate must be positive")
    D, d, nu, R = p.D, p.d, p.nu, p.R

    beta_bar = k_u(tau, mu_eff * R / D) / R
    if p.N in (2, 3):
        beta_under = 0.0
    else:
        rhs = (mu_eff * R / D) * d * (p.N - 3) / (nu * R + d * (p.N - 3))
        beta_under = k_u(tau, rhs) / R

    def chi_u(beta):
        b = np.asarray(beta, dtype=float)
        h = h_u(tau, b * R) if b.ndim else np.array([h_u(tau, float(b) * R)])
        h = np.atleast_1d(h)
        den = mu_eff * R - D * h
        val = np.where(den > 0.0, nu * D * h / np.where(den > 0, den, 1.0), CHI_CAP)
        val = np.minimum(val, CHI_CAP)
        return val if np.asarray(beta).ndim else float(val[0])

    def delta(beta):
        scalar = np.asarray(beta).ndim == 0
        b = np.atleast_1d(np.asarray(beta, dtype=float))
        if np.any(b <= beta_under) or np.any(b >= beta_bar):
            raise DomainError(
                f"delta defined on (beta_under, beta_bar) = ({beta_under}, {beta_bar})"
            )
        chi = np.atleast_1d(chi_u(b))
        # chi_u > chi_v(0+) on the window, but float noise at the left edge
        # can dip below the h_v range floor max(0, N-3); clamp into range.
        s_floor = np.nextafter(max(0.0, 2.0 * tau), np.inf)
        s = np.maximum(R * chi / d, s_floor)
        val = np.minimum(k_v(tau, s) / R, DELTA_CAP)
        return float(val[0]) if scalar else val

    def gamma(beta: float) -> float:
        b = float(beta)
        if not beta_under < b < beta_bar:
            raise DomainError("gamma defined on (beta_under, beta_bar)")
        dl = float(delta(b))
        num = mu_eff * bessel_j(tau, b * R) - D * b * bessel_j(tau + 1, b * R)
        kden = bessel_k(tau, dl * R)
        if kden == 0.0:  # K underflow at huge decay: amplitude diverges
            return math.inf
        return num / (nu * kden)

    return DispersionCurves(
        p=p,
        tau=tau,
        beta_bar=beta_bar,
        beta_under=beta_under,
        chi_u=chi_u,
        delta=delta,
        gamma=gamma,
        mu=mu_eff,
    )


def enhancement_test(p: Params, *, mu: float | None = None) -> bool:
    """Is the spreading speed strictly above the exterior Fisher speed?

    Evaluates ``D (f'(0) - d beta_under(D)^2) > d (2 f'(0) - g'(0))``; for
    ``N in {2, 3}`` the window floor vanishes and this is the same threshold
    as for the half-space and road-field problems.
    """
    p.require_kpp()
    curves = build_curves(p, mu=mu)
    lhs = p.D * (p.fp - p.d * curves.beta_under**2)
    return lhs > p.d * (2.0 * p.fp - p.gp)


@dataclass(frozen=True)
class EnhancementProfile:
    """How the set of interior diffusivities with enhanced speed looks.

    kind is one of:
      - "all":                 enhanced for every D > 0 (threshold 0)
      - "above_threshold":     enhanced exactly for D > D_bar
      - "complement_interval": enhanced for D outside [D1, D2]
    """

    kind: str
    D_bar: float | None = None
    D1: float | None = None
    D2: float | None = None
    minimum: float | None = None  # min over D of D (f'(0) - d beta_under(D)^2)


def _zeta(p: Params, D: float) -> float:
    q = Params(
        D=D, d=p.d, gp=p.gp, fp=p.fp, mu=p.mu, nu=p.nu, R=p.R, S=p.S, N=p.N
    )
    return D * (p.fp - p.d * build_curves(q).beta_under ** 2)


def enhancement_profile(p: Params) -> EnhancementProfile:
    """Classify the enhanced-diffusivity set for ``N in {4, 5}``.

    The map ``zeta(D) = D (f'(0) - d beta_under(D)^2)`` is convex with
    ``zeta(0) = 0`` and ``zeta(+inf) = +inf``; its position relative to the
    level ``d (2 f'(0) - g'(0))`` decides between a single threshold and a
    non-connected enhanced set.
    """
    p.require_kpp()
    if p.N not in (4, 5):
        raise DomainError("the profile classification applies to N in {4, 5}")
    level = p.d * (2.0 * p.fp - p.gp)
    tau = p.tau
    jt = first_zero_j(tau)
    zeta = lambda D: _zeta(p, D)

    if p.R * math.sqrt(p.fp / p.d) >= jt:
        # zeta'(0) >= 0: zeta increases from 0.
        if level <= 0.0:
            return EnhancementProfile(kind="all", D_bar=0.0)
        hi = 1.0
        while zeta(hi) <= level:
            hi *= 4.0
        D_bar = bracket_root(lambda D: zeta(D) - level, hi / 1e6, hi)
        return EnhancementProfile(kind="above_threshold", D_bar=D_bar)

    # zeta dips negative before growing: locate its minimum by golden section.
    hi = 1.0
    while not (zeta(2 * hi) > zeta(hi) and zeta(hi) > 0.0):
        hi *= 2.0
        if hi > 1e12:
            break
    D_min, M = golden_min(zeta, 1e-8, hi, rtol=1e-10)

    if level < M:
        return EnhancementProfile(kind="all", D_bar=0.0, minimum=M)
    hi2 = max(hi, 2.0 * D_min)
    while zeta(hi2) <= level:
        hi2 *= 2.0
    if level >= 0.0:
        D_bar = bracket_root(lambda D: zeta(D) - level, D_min, hi2)
        return EnhancementProfile(kind="above_threshold", D_bar=D_bar, minimum=M)
    # M <= level < 0: the sublevel set is an interval [D1, D2] away from 0.
    D1 = bracket_root(lambda D: zeta(D) - level, 1e-10, D_min)
    D2 = bracket_root(lambda D: zeta(D) - level, D_min, hi2)
    return EnhancementProfile(kind="complement_interval", D1=D1, D2=D2, minimum=M)


# ---------------------------------------------------------------------------
# The tangency search
# ---------------------------------------------------------------------------


def _region_gap(
    curves: DispersionCurves, c: float, c_f_sq: float, rho_shift: float, n_grid: int
) -> tuple[float, float, float]:
    """Minimal vertical gap between the two dispersion regions at speed ``c``.

    The exterior radicand is ``c^2 - c_f_sq + rho_shift - 4 d^2 delta^2``
    (``rho_shift = 4 d rho`` in the mortality variant, else 0).  Returns
    ``(gap, beta, alpha)`` at the minimizing ``beta``; gap <= 0 means the
    regions intersect.  The minimum is localized by staged grid refinement,
    each stage one vectorized sweep.
    """
    p = curves.p
    budget = c * c - c_f_sq + rho_shift
    if budget <= 0.0:
        return math.inf, math.nan, math.nan
    delta_target = math.sqrt(budget) / (2.0 * p.d)
    breve = curves.beta_breve(delta_target)
    lo = max(curves.beta_under, curves.beta_hat(c))
    eps = 1e-9 * (curves.beta_bar - curves.beta_under)
    lo = lo + eps
    hi = breve - eps
    if hi <= lo:
        return math.inf, math.nan, math.nan

    def gap_at(beta: np.ndarray) -> np.ndarray:
        dl = curves.delta(beta)
        ext = np.maximum(budget - 4.0 * p.d * p.d * dl * dl, 0.0)
        ad_lo = np.maximum(0.0, (c - np.sqrt(ext)) / (2 * p.d))
        ad_hi = (c + np.sqrt(ext)) / (2 * p.d)
        aD_lo, aD_hi = curves.alpha_D(c, beta)
        aD_lo = np.maximum(0.0, aD_lo)
        return np.maximum(aD_lo - ad_hi, ad_lo - aD_hi)

    a, b = lo, hi
    bstar = gmin = None
    for stage_points in (n_grid, 65, 65, 65):
        betas = np.linspace(a, b, stage_points)
        gaps = gap_at(betas)
        i = int(np.nanargmin(gaps))
        if gmin is None or gaps[i] < gmin:
            bstar, gmin = float(betas[i]), float(gaps[i])
        a = betas[max(0, i - 1)]
        b = betas[min(stage_points - 1, i + 1)]

    # Contact value: the interval midpoint can sit measurably off both curves
    # when the contact is nearly degenerate, while a branch endpoint of one
    # curve lies on it exactly and within the (tiny) overlap of the other
    # region.  Minimizing the worse residual over the endpoint candidates
    # keeps the witness at solver accuracy in every regime.
    dl = float(curves.delta(np.array([bstar]))[0])
    ext = max(budget - 4.0 * p.d * p.d * dl * dl, 0.0)
    ad = ((c - math.sqrt(ext)) / (2 * p.d), (c + math.sqrt(ext)) / (2 * p.d))
    aD = tuple(float(v) for v in curves.alpha_D(c, bstar))
    alpha_lo = max(max(0.0, ad[0]), max(0.0, aD[0]))
    alpha_hi = min(ad[1], aD[1])
    exterior_level = (c_f_sq - rho_shift) / (4.0 * p.d)

    def residual(alpha: float) -> float:
        e_int = c * alpha - p.D * alpha**2 + p.D * bstar**2 - p.gp
        e_ext = c * alpha - p.d * alpha**2 - p.d * dl * dl - exterior_level
        return max(abs(e_int), abs(e_ext))

    candidates = [0.5 * (alpha_lo + alpha_hi), *ad, *aD]
    alpha = min(candidates, key=residual)
    return float(gmin), float(bstar), float(alpha)


def _contact_branch(curves: DispersionCurves, c: float, beta: float, alpha: float,
                    c_f_sq: float, rho_shift: float) -> str:
    p = curves.p
    dl = float(curves.delta(beta))
    ext = max(c * c - c_f_sq + rho_shift - 4 * p.d * p.d * dl * dl, 0.0)
    ad = ((c - math.sqrt(ext)) / (2 * p.d), (c + math.sqrt(ext)) / (2 * p.d))
    aD_lo, aD_hi = curves.alpha_D(c, beta)
    if abs(ad[0] - float(aD_hi)) <= abs(ad[1] - float(aD_lo)):
        return "d_minus-D_plus"
    return "d_plus-D_minus"


def _tangency_speed(
    curves: DispersionCurves,
    c_lo: float,
    c_hi: float,
    c_f_sq: float,
    rho_shift: float,
    *,
    n_grid: int = 512,
    rtol: float = 1e-12,
) -> tuple[float, float, float, int]:
    """Smallest ``c`` in ``(c_lo, c_hi]`` at which the regions intersect."""
    iters = 0

    def pred(c: float) -> bool:
        nonlocal iters
        iters += 1
        return _region_gap(curves, c, c_f_sq, rho_shift, n_grid)[0] <= 0.0

    c_star = smallest_true(pred, c_lo, c_hi, rtol=rtol)
    _, beta, alpha = _region_gap(curves, c_star, c_f_sq, rho_shift, n_grid)
    return c_star, beta, alpha, iters


def speed_cylinder(p: Params, *, mu: float | None = None, n_grid: int = 512) -> TangencyResult:
    """Spreading speed along the cylinder axis (KPP exterior).

    Returns the exterior Fisher speed when the arc emerges inside the
    hyperbola region (no enhancement); otherwise bisects for the first
    region contact.  For ``N >= 6`` only the no-enhancement certificate is
    available; the enhanced case errors out as unsupported.
    """
    p.require_kpp()
    enhanced = enhancement_test(p, mu=mu)
    if p.N > 5 and enhanced:
        raise UnsupportedDimensionError(
            f"N={p.N} with the enhancement condition satisfied has no "
            "curve-tangency characterization; only N <= 5 is supported"
        )
    curves = build_curves(p, mu=mu)
    c_f = p.c_f
    if not enhanced:
        return TangencyResult(
            c_star=c_f,
            beta_star=curves.beta_under,
            alpha_star=c_f / (2.0 * p.d),
            enhanced=False,
            branch="arc_inside_hyperbola",
            diagnostics={"beta_bar": curves.beta_bar, "beta_under": curves.beta_under},
        )
    c_hi = 2.0 * math.sqrt(max(p.D, p.d) * max(p.gp, p.fp)) + 1.0
    c_star, beta, alpha, iters = _tangency_speed(
        curves, c_f * (1.0 + 1e-14), c_hi, c_f * c_f, 0.0, n_grid=n_grid
    )
    branch = _contact_branch(curves, c_star, beta, alpha, c_f * c_f, 0.0)
    dl = float(curves.delta(beta))
    res_D = c_star * alpha - p.D * alpha**2 + p.D * beta**2 - p.gp
    res_d = c_star * alpha - p.d * alpha**2 - p.d * dl * dl - p.fp
    return TangencyResult(
        c_star=c_star,
        beta_star=beta,
        alpha_star=alpha,
        enhanced=True,
        branch=branch,
        diagnostics={
            "beta_bar": curves.beta_bar,
            "beta_under": curves.beta_under,
            "delta_star": dl,
            "residual_interior": res_D,
            "residual_exterior": res_d,
            "predicate_evaluations": iters,
        },
    )


def speed_limit_D(p: Params, mode: str) -> float:
    """Limiting behavior of the axial speed as the interior diffusivity moves.

    ``mode="D_TO_0"``: the small-D limit (closed form when enhancement
    persists near 0, else the exterior Fisher speed).  ``mode="D_TO_INF"``:
    the limit of ``c*(D)/sqrt(D)``, estimated by polynomial extrapolation in
    ``1/sqrt(D)`` over D = 1e2, 1e3, 1e4.
    """
    p.require_kpp()
    if mode == "D_TO_0":
        if p.gp >= 2.0 * p.fp:
            return p.gp * math.sqrt(p.d / (p.gp - p.fp))
        return p.c_f
    if mode == "D_TO_INF":
        Ds = [1e2, 1e3, 1e4]
        xs = np.array([1.0 / math.sqrt(D) for D in Ds])
        ys = []
        for D in Ds:
            q = Params(D=D, d=p.d, gp=p.gp, fp=p.fp, mu=p.mu, nu=p.nu, R=p.R, S=p.S, N=p.N)
            ys.append(speed_cylinder(q).c_star / math.sqrt(D))
        coeffs = np.polyfit(xs, np.array(ys), 2)
        return float(coeffs[-1])
    raise DomainError(f"unknown mode {mode!r}")


def speed_limit_R(p: Params, mode: str) -> float:
    """Limiting axial speed as the cylinder radius collapses or fills space."""
    p.require_kpp()
    if mode == "R_TO_0":
        return p.c_f
    if mode == "R_TO_INF":
        return speed_halfspace(p, cross_check=False).c
    raise DomainError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Road-field speed (planar strip collapsed onto a line)
# ---------------------------------------------------------------------------


def road_field_speed(p: Params, *, n_grid: int = 512) -> SpeedResult:
    """Speed of the line/half-plane fast-diffusion model.

    The line's dispersion relation sees the exterior decay only through the
    loss term ``mu d delta / (nu + d delta)``; the speed is the smallest
    ``c`` at which the two relations share a decay pair ``(delta, alpha)``.
    """
    p.require_kpp()
    if classify_kpp(p) is Regime.FISHER:
        return SpeedResult(c=p.c_f, regime=Regime.FISHER, witness=(0.0, p.c_f / (2 * p.d)))

    cf2 = p.c_f**2

    def g_eff(delta: np.ndarray) -> np.ndarray:
        return p.gp - p.mu * p.d * delta / (p.nu + p.d * delta)

    def gap_min(c: float) -> tuple[float, float, float]:
        d_hi = math.sqrt(max(c * c - cf2, 0.0)) / (2.0 * p.d)
        if d_hi <= 0.0:
            return math.inf, math.nan, math.nan
        deltas = np.linspace(d_hi * 1e-9, d_hi * (1 - 1e-12), n_grid)
        ext = np.maximum(c * c - cf2 - 4 * p.d * p.d * deltas**2, 0.0)
        ad_lo = np.maximum(0.0, (c - np.sqrt(ext)) / (2 * p.d))
        ad_hi = (c + np.sqrt(ext)) / (2 * p.d)
        lin = c * c - 4.0 * p.D * g_eff(deltas)
        valid = lin >= 0.0
        aD_lo = np.where(valid, np.maximum(0.0, (c - np.sqrt(np.maximum(lin, 0.0))) / (2 * p.D)), np.nan)
        aD_hi = np.where(valid, (c + np.sqrt(np.maximum(lin, 0.0))) / (2 * p.D), np.nan)
        gaps = np.where(valid, np.maximum(aD_lo - ad_hi, ad_lo - aD_hi), np.inf)
        i = int(np.nanargmin(gaps))
        alpha = 0.5 * (max(ad_lo[i], aD_lo[i]) + min(ad_hi[i], aD_hi[i]))
        return float(gaps[i]), float(deltas[i]), float(alpha)

    c_hi = 2.0 * math.sqrt(max(p.D, p.d) * max(p.gp, p.fp)) + 1.0
    c_star = smallest_true(
        lambda c: gap_min(c)[0] <= 0.0, p.c_f * (1.0 + 1e-14), c_hi, rtol=1e-12
    )
    _, delta_star, alpha = gap_min(c_star)
    return SpeedResult(
        c=c_star,
        regime=Regime.ANOMALOUS,
        witness=(delta_star, alpha),
        diagnostics={"c_f": p.c_f},
    )


def rescaled_speed(p: Params, mu_tilde: Callable[[float], float], R: float) -> TangencyResult:
    """Cylinder speed at radius ``R`` with exchange rate ``mu_tilde(R)``.

    Recovers the road-field speed when ``mu_tilde(R)/R -> mu``, the exterior
    Fisher speed when the ratio diverges, and the half-space speed when it
    vanishes.
    """
    p.require_kpp()
    if p.N != 2:
        raise DomainError("the rescaled strip problem is planar (N = 2)")
    mu_R = float(mu_tilde(R))
    if mu_R <= 0:
        raise DomainError("mu_tilde(R) must be positive")
    q = Params(D=p.D, d=p.d, gp=p.gp, fp=p.fp, mu=mu_R, nu=p.nu, R=R, S=p.S, N=2)
    return speed_cylinder(q)


def max_effect_dimension(p: Params, *, n_max: int = 103) -> int:
    """Smallest dimension beyond which the cylinder stops enhancing the speed.

    Scans ``N = 4 .. n_max`` and returns the smallest ``N0 >= 4`` with the
    enhancement condition false for every scanned ``N >= N0``; returns -1
    (sentinel) if enhancement persists at the top of the scan range.
    """
    p.require_kpp()
    flags = []
    for N in range(4, n_max + 1):
        q = Params(D=p.D, d=p.d, gp=p.gp, fp=p.fp, mu=p.mu, nu=p.nu, R=p.R, S=p.S, N=N)
        flags.append(enhancement_test(q))
    if flags[-1]:
        return -1
    last_true = -1
    for i, flag in enumerate(flags):
        if flag:
            last_true = i
    return 4 + last_true + 1
