"""Cylinder with a hostile exterior: survival thresholds and the speed c*_m.

With mortality ``-rho v`` outside, the exterior steady profile is an explicit
K-Bessel tail, so the whole interface condition condenses into a Robin
constant ``kappa`` on the cylinder section.  Survival of the population is
equivalent to ``g'(0)/D`` exceeding the principal Robin eigenvalue
``beta0^2``; the spreading speed construction then mirrors the KPP case with
the exterior arc shifted by the mortality rate (making it available for every
``c > 0``).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import kv

from ._rootfind import bracket_root, smallest_true
from .cylinder import _contact_branch, _region_gap, build_curves
from .params import (
    DomainError,
    EigenResult,
    InfeasibleError,
    Params,
    RadialSteady,
    TangencyResult,
    logistic,
)
from .specfun import h_v, k_u


def robin_kappa(p: Params) -> float:
    """Robin constant of the section problem induced by the exterior tail.

    ``kappa = mu sqrt(d rho) K_{tau+1}(z) / (nu K_tau(z) + sqrt(d rho) K_{tau+1}(z))``
    with ``z = sqrt(rho/d) R``; always strictly between 0 and ``mu``.
    """
    p.require_mortality()
    z = math.sqrt(p.rho / p.d) * p.R
    q = math.sqrt(p.d * p.rho) * h_v(p.tau, z) / z  # = sqrt(d rho) K_{tau+1}/K_tau
    return p.mu * q / (p.nu + q)


def robin_eigenvalue(p: Params) -> EigenResult:
    """Principal Robin eigenvalue ``beta0^2`` of the cylinder section.

    ``beta0`` is the unique solution of ``chi_u(beta0) = chi_v(sqrt(rho/d))``
    in the admissible window; equivalently ``h_u(beta0 R) = kappa R / D``.
    Survival of the coupled system holds iff ``g'(0)/D > beta0^2``.
    """
    p.require_mortality()
    curves = build_curves(p)
    target = p.d / p.R * h_v(p.tau, math.sqrt(p.rho / p.d) * p.R)  # chi_v(sqrt(rho/d))
    eps = 1e-11 * (curves.beta_bar - curves.beta_under)
    beta0 = bracket_root(
        lambda b: float(curves.chi_u(b)) - target,
        curves.beta_under + eps,
        curves.beta_bar * (1.0 - 1e-12),
    )
    residual = abs(float(curves.chi_u(beta0)) - target) / max(1.0, target)
    return EigenResult(
        beta0=beta0,
        kappa=robin_kappa(p),
        survives=p.gp / p.D > beta0 * beta0,
        residual=residual,
    )


def _beta0_fast(p: Params) -> float:
    """beta0 through the closed Robin form: one k_u inversion."""
    return k_u(p.tau, robin_kappa(p) * p.R / p.D) / p.R


def _with(p: Params, **kw) -> Params:
    fields = dict(D=p.D, d=p.d, gp=p.gp, rho=p.rho, mu=p.mu, nu=p.nu, R=p.R, S=p.S, N=p.N)
    fields.update(kw)
    return Params(**fields)


def survival_threshold_R(p: Params) -> float:
    """Critical radius: survival holds exactly for ``R`` above the returned value."""
    p.require_mortality()

    def excess(R: float) -> float:
        return _beta0_fast(_with(p, R=R)) ** 2 * p.D - p.gp

    lo = hi = p.R
    while excess(lo) <= 0.0:  # beta0 too small: shrink until extinction side
        lo /= 2.0
        if lo < 1e-12:
            raise InfeasibleError("no extinction radius found above R = 1e-12")
    while excess(hi) >= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise InfeasibleError("no survival radius found below R = 1e12")
    R0 = bracket_root(excess, lo, hi)
    return R0


def survival_threshold_D(p: Params) -> float:
    """Critical interior diffusivity, or ``inf`` when survival holds for all D.

    Survival for every ``D`` is equivalent to
    ``mu (N-1) / (R g'(0)) <= 1 + nu K_tau(z) / (sqrt(d rho) K_{tau+1}(z))``;
    otherwise ``D * beta0(D)^2`` crosses ``g'(0)`` at a unique ``D0`` and
    survival holds exactly for ``D < D0``.
    """
    p.require_mortality()
    z = math.sqrt(p.rho / p.d) * p.R
    ratio = z / h_v(p.tau, z)  # = K_tau(z) / K_{tau+1}(z)
    lhs = p.mu * (p.N - 1) / (p.R * p.gp)
    rhs = 1.0 + p.nu / math.sqrt(p.d * p.rho) * ratio
    if lhs <= rhs * (1.0 + 1e-12):
        return math.inf

    def excess(D: float) -> float:
        return D * _beta0_fast(_with(p, D=D)) ** 2 - p.gp

    lo, hi = p.D, p.D
    while excess(lo) >= 0.0:
        lo /= 2.0
        if lo < 1e-12:
            raise InfeasibleError("no surviving diffusivity above D = 1e-12")
    while excess(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e15:
            raise InfeasibleError("D beta0(D)^2 never reached g'(0)")
    return bracket_root(excess, lo, hi)


def speed_cylinder_mortality(p: Params, *, n_grid: int = 512) -> TangencyResult:
    """Axial spreading speed under exterior mortality.

    Defined only in the survival regime.  The exterior arc exists for every
    positive speed; the first region contact with the interior hyperbola is
    found by the same monotone bisection as the KPP case, with the exterior
    radicand shifted by ``4 d rho``.
    """
    p.require_mortality()
    eig = robin_eigenvalue(p)
    if not eig.survives:
        raise InfeasibleError(
            f"no propagation: g'(0)/D = {p.gp / p.D:.6g} <= beta0^2 = {eig.beta0**2:.6g}"
        )
    if p.D < p.d and p.N > 5:
        raise DomainError("D < d with N >= 6 is outside the tangency construction")
    curves = build_curves(p)
    rho_shift = 4.0 * p.d * p.rho
    c_hi = p.c_g + 1.0
    iters = 0

    def pred(c: float) -> bool:
        nonlocal iters
        iters += 1
        return _region_gap(curves, c, 0.0, rho_shift, n_grid)[0] <= 0.0

    c_lo = 1e-12 * p.c_g
    if pred(c_lo):
        raise InfeasibleError("dispersion regions already meet at c ~ 0")
    c_star = smallest_true(pred, c_lo, c_hi, rtol=1e-12)
    _, beta, alpha = _region_gap(curves, c_star, 0.0, rho_shift, n_grid)
    branch = _contact_branch(curves, c_star, beta, alpha, 0.0, rho_shift)
    dl = float(curves.delta(np.array([beta]))[0])
    diagnostics = {
        "beta0": eig.beta0,
        "beta_bar": curves.beta_bar,
        "beta_under": curves.beta_under,
        "delta_star": dl,
        "residual_interior": c_star * alpha - p.D * alpha**2 + p.D * beta**2 - p.gp,
        "residual_exterior": c_star * alpha - p.d * alpha**2 - p.d * dl * dl + p.rho,
        "predicate_evaluations": iters,
    }
    if p.D >= p.d and p.N > 5:
        diagnostics["note"] = (
            "N >= 6 with D >= d: first contact occurs right of beta0 so the "
            "construction applies, but no tangency guarantee is available"
        )
    return TangencyResult(
        c_star=c_star,
        beta_star=beta,
        alpha_star=alpha,
        enhanced=False,
        branch=branch,
        diagnostics=diagnostics,
    )


def cg_upper_bound_check(p: Params) -> bool:
    """Sufficient condition for the mortality speed to lie below c_g.

    First branch: ``(d - D) c_g <= 2 d beta_under``.  Otherwise the paired
    inequality ``(d/D)(1 - C)^2 <= 2 + rho/g'(0) - 2C`` with
    ``C = beta_under / sqrt(D g'(0))`` decides.
    """
    p.require_mortality()
    bu = build_curves(p).beta_under
    if (p.d - p.D) * p.c_g - 2.0 * p.d * bu <= 0.0:
        return True
    C = bu / math.sqrt(p.D * p.gp)
    return p.d / p.D * (1.0 - C) ** 2 <= 2.0 + p.rho / p.gp - 2.0 * C


def radial_steady_mortality(
    p: Params, g: Callable[[float], float] | None = None, n_grid: int = 400
) -> RadialSteady:
    """Radial steady state by shooting on the center value.

    Integrates the section ODE ``-D(phi'' + (N-2)/r phi') = g(phi)`` from a
    regular series start at ``r = eps`` and matches the Robin condition
    ``D phi'(R) + kappa phi(R) = 0``; the exterior amplitude follows from the
    flux.  Exists only in the survival regime, and the shot amplitude is
    unique.
    """
    p.require_mortality()
    g = g if g is not None else logistic(p.gp, 1.0)
    eig = robin_eigenvalue(p)
    if not eig.survives:
        raise InfeasibleError("no positive radial steady state: extinction regime")
    kappa = eig.kappa
    eps = p.R * 1e-6

    def shoot(a: float) -> tuple[float, float, float]:
        """Integrate from the center; returns (phi(R), phi'(R), min phi)."""
        ga = g(a)
        y0 = [a - ga * eps * eps / (2.0 * p.D * (p.N - 1)), -ga * eps / (p.D * (p.N - 1))]

        def rhs(r, y):
            phi, dphi = y
            return [dphi, -(p.N - 2) / r * dphi - g(phi) / p.D]

        sol = solve_ivp(
            rhs, (eps, p.R), y0, method="RK45", rtol=1e-10, atol=1e-12, dense_output=True
        )
        if not sol.success:
            raise ArithmeticError(f"radial integration failed at a={a}: {sol.message}")
        phiR, dphiR = sol.y[0, -1], sol.y[1, -1]
        return phiR, dphiR, float(np.min(sol.y[0]))

    def robin_residual(a: float) -> float:
        phiR, dphiR, _ = shoot(a)
        return p.D * dphiR + kappa * phiR

    # Residual is positive at a ~ 1 (phi ~ 1, derivative ~ 0) and negative for
    # small a in the survival regime; scan for the bracket.
    a_grid = np.concatenate([np.geomspace(1e-4, 0.5, 12), np.linspace(0.55, 1.0 - 1e-10, 8)])
    vals = [robin_residual(a) for a in a_grid]
    bracket = None
    for a0, a1, v0, v1 in zip(a_grid, a_grid[1:], vals, vals[1:]):
        if v0 * v1 <= 0.0:
            bracket = (a0, a1)
            break
    if bracket is None:
        raise InfeasibleError("no sign change in the Robin shooting residual on (0, 1)")
    a_star = bracket_root(robin_residual, *bracket)

    phiR, dphiR, phi_min = shoot(a_star)
    if not (0.0 < phi_min and phiR < 1.0 and a_star < 1.0):
        raise ArithmeticError("radial profile left the (0, 1) range")
    z = math.sqrt(p.rho / p.d) * p.R
    gamma = -p.D * dphiR * p.R**p.tau / (math.sqrt(p.d * p.rho) * kv(p.tau + 1.0, z))

    # Sampled profiles: interior by re-integration on the output grid,
    # exterior from the explicit K tail.
    ga = g(a_star)
    y0 = [a_star - ga * eps * eps / (2.0 * p.D * (p.N - 1)), -ga * eps / (p.D * (p.N - 1))]
    r_in = np.linspace(eps, p.R, n_grid)
    sol = solve_ivp(
        lambda r, y: [y[1], -(p.N - 2) / r * y[1] - g(y[0]) / p.D],
        (eps, p.R),
        y0,
        method="RK45",
        rtol=1e-10,
        atol=1e-12,
        t_eval=r_in,
    )
    phi = sol.y[0]
    decay = math.sqrt(p.rho / p.d)
    r_out = np.linspace(p.R, p.R + 30.0 / decay, n_grid)
    psi = gamma * r_out ** (-p.tau) * kv(p.tau, decay * r_out)
    return RadialSteady(
        a0=a_star,
        gamma_ext=gamma,
        r_in=r_in,
        phi=phi,
        r_out=r_out,
        psi=psi,
        robin_residual=abs(p.D * dphiR + kappa * phiR),
    )
