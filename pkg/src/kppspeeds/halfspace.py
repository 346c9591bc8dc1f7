"""Speeds and steady states for the two adjacent half-space systems.

The spreading speed of the coupled linearization is the smallest wave speed
``c`` at which the two dispersion parabolas

    D a^2 - c a + g'(0) <= 0      (interior medium)
    d a^2 - c a + f'(0) <= 0      (exterior medium; f'(0) -> -rho under mortality)

admit a common decay rate ``a > 0``.  Closed forms exist in every parameter
regime; the interval-overlap search is kept alongside them as a cross-check.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ._rootfind import adaptive_simpson, bracket_root, golden_min, smallest_true
from .params import (
    DomainError,
    InfeasibleError,
    Params,
    Regime,
    SpeedResult,
    SteadyProfile,
    logistic,
)

_QUAD_TOL = 1e-12


def fisher_speeds(p: Params) -> tuple[float, float]:
    """Single-medium KPP speeds ``(c_f, c_g) = (2 sqrt(d f'(0)), 2 sqrt(D g'(0)))``."""
    p.require_kpp()
    return p.c_f, p.c_g


def _roots_interior(p: Params, c: float) -> tuple[float, float]:
    disc = c * c - p.c_g**2
    if disc < 0:
        raise DomainError("no real interior roots below c_g")
    s = math.sqrt(disc)
    return (c - s) / (2 * p.D), (c + s) / (2 * p.D)


def _roots_exterior(p: Params, c: float) -> tuple[float, float]:
    if p.mortality:
        s = math.sqrt(c * c + 4 * p.d * p.rho)
        return (max(0.0, (c - s) / (2 * p.d)), (c + s) / (2 * p.d))
    disc = c * c - p.c_f**2
    if disc < 0:
        raise DomainError("no real exterior roots below c_f")
    s = math.sqrt(disc)
    return (c - s) / (2 * p.d), (c + s) / (2 * p.d)


def overlap_speed(p: Params, *, rtol: float = 1e-12) -> tuple[float, float]:
    """Smallest ``c`` at which the two root intervals intersect, plus contact alpha.

    This is the geometric construction of the spreading speed; it must agree
    with the closed-form classification to ~1e-9.
    """
    c_min = p.c_g if p.mortality else max(p.c_f, p.c_g)

    def overlapping(c: float) -> bool:
        lo_D, hi_D = _roots_interior(p, c)
        lo_d, hi_d = _roots_exterior(p, c)
        return max(lo_D, lo_d) <= min(hi_D, hi_d)

    if overlapping(c_min):
        c_star = c_min
    else:
        hi = 2.0 * math.sqrt(max(p.D, p.d) * max(p.gp, p.fp or p.gp)) + 1.0
        c_star = smallest_true(overlapping, c_min, hi, rtol=rtol)
    lo_D, hi_D = _roots_interior(p, c_star)
    lo_d, hi_d = _roots_exterior(p, c_star)
    alpha = 0.5 * (max(lo_D, lo_d) + min(hi_D, hi_d))
    return c_star, alpha


def classify_kpp(p: Params) -> Regime:
    """Regime of the half-space speed; boundary cases classify as the closed form."""
    p.require_kpp()
    if p.D / p.d <= 2.0 - p.gp / p.fp:
        return Regime.FISHER
    if p.d / p.D <= 2.0 - p.fp / p.gp:
        return Regime.INTERIOR
    return Regime.ANOMALOUS


def anomalous_speed(p: Params) -> float:
    """``|D f'(0) - d g'(0)| / sqrt((D - d)(f'(0) - g'(0)))``."""
    p.require_kpp()
    return abs(p.D * p.fp - p.d * p.gp) / math.sqrt((p.D - p.d) * (p.fp - p.gp))


def speed_halfspace(p: Params, *, cross_check: bool = True) -> SpeedResult:
    """Spreading speed of the KPP/KPP half-space system along the interface."""
    p.require_kpp()
    regime = classify_kpp(p)
    if regime is Regime.FISHER:
        c = p.c_f
    elif regime is Regime.INTERIOR:
        c = p.c_g
    else:
        c = anomalous_speed(p)
    diagnostics: dict = {}
    witness = None
    if cross_check:
        c_geo, alpha = overlap_speed(p)
        diagnostics["overlap_speed"] = c_geo
        diagnostics["overlap_gap"] = abs(c_geo - c) / c
        witness = (0.0, alpha)
    return SpeedResult(c=c, regime=regime, witness=witness, diagnostics=diagnostics)


def speed_halfspace_mortality(p: Params, *, cross_check: bool = True) -> SpeedResult:
    """Spreading speed of the KPP/mortality half-space system."""
    p.require_mortality()
    if p.d / p.D <= 2.0 + p.rho / p.gp:
        regime, c = Regime.INTERIOR, p.c_g
    else:
        regime = Regime.ANOMALOUS
        c = (p.D * p.rho + p.d * p.gp) / math.sqrt((p.d - p.D) * (p.rho + p.gp))
    diagnostics: dict = {}
    witness = None
    if cross_check:
        c_geo, alpha = overlap_speed(p)
        diagnostics["overlap_speed"] = c_geo
        diagnostics["overlap_gap"] = abs(c_geo - c) / c
        witness = (0.0, alpha)
    return SpeedResult(c=c, regime=regime, witness=witness, diagnostics=diagnostics)


def regime_diagram(
    x_values: np.ndarray, y_values: np.ndarray
) -> tuple[list[tuple[float, float, Regime]], dict[str, Callable[[float], float]]]:
    """Classify the speed regime over a grid of ``x = D/d`` and ``y = g'(0)/f'(0)``.

    Returns the classified cells plus the two analytic boundary curves
    ``y = 2 - x`` (below: exterior Fisher speed) and ``y = x/(2x - 1)``
    (above: interior Fisher speed).
    """
    rows = []
    for x in np.asarray(x_values, dtype=float):
        if x <= 0:
            raise DomainError("x = D/d grid must be positive")
        for y in np.asarray(y_values, dtype=float):
            if y <= 0:
                raise DomainError("y = g'(0)/f'(0) grid must be positive")
            # Classify in the boundary-curve arithmetic itself so that grid
            # cells landing exactly on a curve tie-break reproducibly.
            if y <= 2.0 - x:
                regime = Regime.FISHER
            elif x > 0.5 and y >= x / (2.0 * x - 1.0):
                regime = Regime.INTERIOR
            else:
                regime = Regime.ANOMALOUS
            rows.append((float(x), float(y), regime))
    curves = {
        "fisher_boundary": lambda x: 2.0 - x,
        "interior_boundary": lambda x: x / (2.0 * x - 1.0) if x > 0.5 else math.inf,
    }
    return rows, curves


# ---------------------------------------------------------------------------
# Steady states via first integrals
# ---------------------------------------------------------------------------


def _integral(f: Callable[[float], float], a: float, b: float) -> float:
    if a == b:
        return 0.0
    return adaptive_simpson(f, a, b, tol=_QUAD_TOL)


def _profile_from_first_integral(
    u0: float,
    limit: float,
    diff: float,
    reaction: Callable[[float], float],
    n_grid: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample the separable profile ``|u'| = sqrt((2/diff) int_u^limit reaction)``.

    Integrates outward from the interface value ``u0`` toward the far-field
    ``limit`` (coordinates returned are >= 0; the caller flips them for the
    interior side).  Values are clamped once within 1e-10 of the limit.
    """
    if abs(u0 - limit) < 1e-10:
        y = np.linspace(0.0, 1.0, n_grid)
        return y, np.full(n_grid, limit)
    sign = 1.0 if u0 < limit else -1.0

    def slope(u: float) -> float:
        val = 2.0 / diff * _integral(reaction, u, limit)
        return sign * math.sqrt(max(val, 0.0))

    # Decay is exponential; step so that n_grid points cover several e-folds.
    rate = math.sqrt(abs(reaction(0.5 * (u0 + limit)) / (0.5 * abs(u0 - limit)) / diff))
    span = 30.0 / max(rate, 1e-3)
    h = span / (n_grid - 1)
    ys = [0.0]
    us = [u0]
    u = u0
    for k in range(1, n_grid):
        # RK4 on u' = slope(u)
        k1 = slope(u)
        k2 = slope(u + 0.5 * h * k1)
        k3 = slope(u + 0.5 * h * k2)
        k4 = slope(u + h * k3)
        u = u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (limit - u) * (limit - u0) < 0:  # overshoot across the limit
            u = limit
        ys.append(k * h)
        us.append(u)
        if abs(u - limit) < 1e-10:
            u = limit
    return np.asarray(ys), np.asarray(us)


def steady_state_halfspace(
    p: Params,
    g: Callable[[float], float] | None = None,
    f: Callable[[float], float] | None = None,
    n_grid: int = 400,
) -> SteadyProfile:
    """Unique positive bounded steady state of the half-space system.

    One-dimensional root solve on the interface value: the first integrals
    pin ``U'(0)`` to the interface value ``U(0)``, the flux conditions then
    determine ``(V(0), V'(0))``, and the exterior first integral supplies the
    scalar residual.  Exactly one of the three branches (both profiles
    decreasing / constant / both increasing) contains the root.
    """
    g = g if g is not None else logistic(p.gp, 1.0)
    if f is None and not p.mortality:
        f = logistic(p.fp, p.S)

    # Constant branch: exchange balances exactly at (1, S).
    if not p.mortality and abs(p.nu * p.S - p.mu) <= 1e-14 * max(p.mu, p.nu * p.S):
        y = np.linspace(0.0, 1.0, n_grid)
        return SteadyProfile(
            U0=1.0,
            V0=p.S,
            dU0=0.0,
            y_u=-y[::-1],
            U=np.ones(n_grid),
            y_v=y,
            V=np.full(n_grid, p.S),
            flux_residual=abs(p.nu * p.S - p.mu),
            branch="constant",
        )

    decreasing = p.mortality or p.mu > p.nu * p.S

    if decreasing:
        # U(0) = a in (0,1), both profiles decreasing; valid only where the
        # implied V(0) stays above its exterior floor (S for KPP, 0 under
        # mortality).  V(0) is increasing in a, so validity is (a_c, 1).
        def interface(a: float) -> tuple[float, float, float]:
            du0 = -math.sqrt(max(0.0, 2.0 / p.D * _integral(g, a, 1.0)))
            v0 = (p.mu * a + p.D * du0) / p.nu
            dv0 = p.D / p.d * du0
            return du0, v0, dv0

        floor = 0.0 if p.mortality else p.S

        if p.mortality:

            def residual(a: float) -> float:
                _, v0, dv0 = interface(a)
                return dv0 * dv0 - p.rho / p.d * v0 * v0
        else:

            def residual(a: float) -> float:
                _, v0, dv0 = interface(a)
                return _integral(f, v0, p.S) - 0.5 * p.d * dv0 * dv0

        hi = 1.0 - 1e-12
        v0_excess = lambda a: interface(a)[1] - floor
        lo = 1e-9
        if v0_excess(lo) <= 0.0:
            lo = bracket_root(v0_excess, lo, hi) + 1e-12
    else:
        # V(0) = b in (0, S), both profiles increasing, roles exchanged;
        # valid only where the implied U(0) exceeds 1 (U(0) increasing in b).
        def interface_b(b: float) -> tuple[float, float, float]:
            dv0 = math.sqrt(max(0.0, 2.0 / p.d * _integral(f, b, p.S)))
            du0 = p.d / p.D * dv0
            u0 = (p.nu * b - p.d * dv0) / p.mu
            return dv0, u0, du0

        def residual(b: float) -> float:
            _, u0, du0 = interface_b(b)
            return _integral(g, u0, 1.0) - 0.5 * p.D * du0 * du0

        hi = p.S * (1.0 - 1e-12)
        u0_excess = lambda b: interface_b(b)[1] - 1.0
        lo = 1e-9 * p.S
        if u0_excess(lo) <= 0.0:
            lo = bracket_root(u0_excess, lo, hi) + 1e-12 * p.S

    grid = np.linspace(lo, hi, 64)
    vals = [residual(a) for a in grid]
    root = None
    for a0, a1, v0, v1 in zip(grid, grid[1:], vals, vals[1:]):
        if np.isfinite(v0) and np.isfinite(v1) and v0 * v1 <= 0.0:
            root = bracket_root(residual, a0, a1)
            break
    if root is None:
        raise InfeasibleError(
            "no interface value solves the exterior first integral "
            f"(branch={'decreasing' if decreasing else 'increasing'}, "
            f"residual range [{min(vals):.3e}, {max(vals):.3e}])"
        )

    if decreasing:
        U0 = root
        dU0, V0, dV0 = interface(root)
        y_u, U = _profile_from_first_integral(U0, 1.0, p.D, g, n_grid)
        if p.mortality:
            decay = math.sqrt(p.rho / p.d)
            y_v = np.linspace(0.0, 30.0 / decay, n_grid)
            V = V0 * np.exp(-decay * y_v)
        else:
            y_v, V = _profile_from_first_integral(V0, p.S, p.d, f, n_grid)
        branch = "decreasing"
    else:
        V0 = root
        dV0, U0, dU0 = interface_b(root)
        y_u, U = _profile_from_first_integral(U0, 1.0, p.D, g, n_grid)
        y_v, V = _profile_from_first_integral(V0, p.S, p.d, f, n_grid)
        branch = "increasing"

    flux_residual = max(
        abs(p.D * dU0 - (p.nu * V0 - p.mu * U0)),
        abs(p.d * dV0 - p.D * dU0),
    )
    return SteadyProfile(
        U0=U0,
        V0=V0,
        dU0=dU0,
        y_u=-y_u[::-1],
        U=U[::-1],
        y_v=y_v,
        V=V,
        flux_residual=flux_residual,
        branch=branch,
    )


# ---------------------------------------------------------------------------
# Truncated-domain speed (finite box of half-width L)
# ---------------------------------------------------------------------------


class _TruncatedCurves:
    """Dispersion machinery of the box-truncated linearization.

    Transverse profiles vanish at distance ``L`` on both sides; the exterior
    decay-squared is the glued, decreasing map ``frak_d`` built from the three
    trig/hyperbolic matching branches.
    """

    def __init__(self, p: Params, L: float, theta: float):
        self.p = p
        self.L = L
        self.theta = theta
        self.lam2 = 0.0 if p.N == 2 else (math.pi / (2.0 * L)) ** 2
        D, d, mu, nu = p.D, p.d, p.mu, p.nu

        self.chi_u1 = lambda b: D * b / math.tan(b * L)
        self.chi_u3 = lambda b: D * b / math.tanh(b * L) if b > 0 else D / L

        def chi_v1(delta: float) -> float:
            sl, cl = math.sin(delta * L), math.cos(delta * L)
            return -mu * d * delta * cl / (nu * sl + d * delta * cl)

        def chi_v2(delta: float) -> float:
            if delta == 0.0:
                return -mu * d / (nu * L + d)
            return -mu * d * delta / (nu * math.tanh(delta * L) + d * delta)

        self.chi_v1 = chi_v1
        self.chi_v2 = chi_v2

        eps = 1e-12
        # First zero of the chi_v1 denominator in (pi/2L, pi/L).
        denom = lambda delta: nu * math.sin(delta * L) + d * delta * math.cos(delta * L)
        self.delta_bar = bracket_root(denom, math.pi / (2 * L) * (1 + eps), math.pi / L * (1 - eps))
        # Branch endpoints: beta_lo where chi_u1 meets chi_v1's delta -> 0
        # limit, delta_lo where chi_v1 meets chi_u1's beta -> 0 limit D/L,
        # beta_hi where chi_u1 meets chi_v2's delta -> inf limit -mu.
        lim_v1_zero = -mu * d / (nu * L + d)
        self.beta_lo = bracket_root(
            lambda b: self.chi_u1(b) - lim_v1_zero,
            math.pi / (2 * L) * (1 + eps),
            math.pi / L * (1 - eps),
        )
        self.delta_lo = bracket_root(
            lambda x: chi_v1(x) - D / L,
            math.pi / (2 * L) * (1 + eps),
            self.delta_bar * (1 - eps),
        )
        self.beta_hi = bracket_root(
            lambda b: self.chi_u1(b) + mu,
            self.beta_lo * (1 + eps),
            math.pi / L * (1 - eps),
        )

    def frak_d(self, beta: float) -> float:
        """Glued exterior decay-squared; decreasing on ``(-inf, beta_hi)``."""
        eps = 1e-14
        if beta <= 0.0:
            target = self.chi_u3(-beta)
            delta3 = bracket_root(
                lambda x: self.chi_v1(x) - target,
                math.pi / (2 * self.L) * (1 + eps),
                self.delta_bar * (1 - 1e-12),
            )
            return delta3 * delta3
        if beta < self.beta_lo:
            target = self.chi_u1(beta)
            delta1 = bracket_root(
                lambda x: self.chi_v1(x) - target,
                1e-250,
                self.delta_bar * (1 - 1e-12),
            )
            return delta1 * delta1
        if beta < self.beta_hi:
            target = self.chi_u1(beta)
            hi = 1.0
            while self.chi_v2(hi) > target:
                hi *= 2.0
                if hi > 1e12:
                    return -math.inf
            delta2 = bracket_root(lambda x: self.chi_v2(x) - target, 1e-250, hi)
            return -delta2 * delta2
        return -math.inf

    def exterior_arg(self, c: float, beta: float) -> float:
        p = self.p
        fd = self.frak_d(beta)
        if not math.isfinite(fd):
            return -math.inf
        return c * c - 4 * p.d * (p.fp - self.theta - p.d * self.lam2 - p.d * fd)

    def interior_arg(self, c: float, beta: float) -> float:
        p = self.p
        q = p.gp - self.theta - p.D * self.lam2
        if beta < 0:
            return c * c - 4 * p.D * (q + p.D * beta * beta)
        return c * c - 4 * p.D * (q - p.D * beta * beta)

    def beta_breve(self, c: float) -> float | None:
        """Right endpoint of the exterior curve domain (None if empty).

        The radicand is decreasing in beta: positive for very negative beta
        (where the decay-squared tends to its supremum) once ``c`` exceeds the
        lower admissible speed, and -inf toward ``beta_hi``.
        """
        hi = self.beta_hi * (1 - 1e-10)
        if self.exterior_arg(c, hi) >= 0.0:
            return hi
        lo = -1.0
        while self.exterior_arg(c, lo) < 0.0:
            lo *= 2.0
            if lo < -1e9:
                return None  # c at or below the lower admissible speed
        return bracket_root(lambda b: self.exterior_arg(c, b), lo, hi)

    def beta_hat(self, c: float) -> float:
        p = self.p
        q = p.gp - self.theta - p.D * self.lam2
        if c * c < 4 * p.D * q:
            return math.sqrt(q / p.D - c * c / (4 * p.D * p.D))
        return -math.sqrt(c * c / (4 * p.D * p.D) - q / p.D)

    def overlapping(self, c: float, n_grid: int = 512) -> tuple[bool, float, float]:
        """Do the interior and exterior regions meet at speed ``c``?

        Returns (overlap, beta_at_min_gap, alpha_at_min_gap).
        """
        bb = self.beta_breve(c)
        if bb is None:
            return False, math.nan, math.nan
        bh = self.beta_hat(c)
        if bh >= bb:
            return False, math.nan, math.nan
        p = self.p
        lo = bh + 1e-12 * max(1.0, abs(bh))
        hi = bb - 1e-12 * max(1.0, abs(bb))

        def gap(beta: float) -> float:
            ea = self.exterior_arg(c, beta)
            ia = self.interior_arg(c, beta)
            if ea < 0 or ia < 0:
                return math.inf
            ad_lo = max(0.0, (c - math.sqrt(ea)) / (2 * p.d))
            ad_hi = (c + math.sqrt(ea)) / (2 * p.d)
            aD_lo = max(0.0, (c - math.sqrt(ia)) / (2 * p.D))
            aD_hi = (c + math.sqrt(ia)) / (2 * p.D)
            return max(aD_lo - ad_hi, ad_lo - aD_hi)

        betas = np.linspace(lo, hi, n_grid)
        gaps = np.array([gap(b) for b in betas])
        i = int(np.argmin(gaps))
        # Golden refinement around the grid minimum.
        a = betas[max(0, i - 1)]
        b = betas[min(n_grid - 1, i + 1)]
        bstar, gmin = golden_min(gap, a, b, rtol=1e-13)
        if gaps[i] < gmin:
            bstar, gmin = betas[i], gaps[i]
        ea = self.exterior_arg(c, bstar)
        ia = self.interior_arg(c, bstar)
        alpha = math.nan
        if ea >= 0 and ia >= 0:
            lo_a = max(
                max(0.0, (c - math.sqrt(ea)) / (2 * p.d)),
                max(0.0, (c - math.sqrt(ia)) / (2 * p.D)),
            )
            hi_a = min((c + math.sqrt(ea)) / (2 * p.d), (c + math.sqrt(ia)) / (2 * p.D))
            alpha = 0.5 * (lo_a + hi_a)
        return gmin <= 0.0, float(bstar), float(alpha)


def truncated_speed_halfspace(p: Params, L: float, theta: float = 0.0) -> SpeedResult:
    """Speed of the box-truncated construction; approaches the anomalous speed.

    Supported for ``N in {2, 3}`` in the anomalous regime.  The overlap
    predicate is monotone in ``c``, so the smallest admissible speed comes
    from plain bisection.
    """
    p.require_kpp()
    if p.N not in (2, 3):
        raise DomainError("truncated speed is implemented for N in {2, 3}")
    if classify_kpp(p) is not Regime.ANOMALOUS:
        raise DomainError("truncated speed requires the anomalous regime")
    if L <= 0:
        raise DomainError("L must be positive")
    if theta < 0 or theta >= min(p.fp, p.gp):
        raise DomainError("theta must lie in [0, min(f'(0), g'(0)))")

    curves = _TruncatedCurves(p, L, theta)
    c_lower_sq = 4 * p.d * (
        p.fp - theta - p.d * curves.lam2 - p.d * curves.delta_bar**2
    )
    c_lo = math.sqrt(max(c_lower_sq, 0.0)) + 1e-9
    c_anom = anomalous_speed(p)
    if curves.overlapping(c_lo)[0]:
        raise InfeasibleError(f"no admissible speed window at L={L}: box too small")

    c_star = smallest_true(lambda c: curves.overlapping(c)[0], c_lo, c_anom * 1.05, rtol=1e-11)
    _, beta_star, alpha_star = curves.overlapping(c_star)
    return SpeedResult(
        c=c_star,
        regime=Regime.ANOMALOUS,
        witness=(beta_star, alpha_star),
        diagnostics={"L": L, "theta": theta, "c_lower": c_lo, "c_anomalous": c_anom},
    )
