"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report lines as they complete.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.optimize import brentq

from kppspeeds import cylinder, halfspace, mortality
from kppspeeds import specfun as sf
from kppspeeds.params import Params, Regime
from kppspeeds.simulate import InitSpec, SimConfig, run_radial, run_strip


def report(number: int, name: str, checks: list[tuple[str, bool]]) -> None:
    ok = all(flag for _, flag in checks)
    print(f"ACCEPTANCE {number:2d} [{name}]: {'PASS' if ok else 'FAIL'}")
    for label, flag in checks:
        if not flag:
            print(f"    failed: {label}")
    assert ok, f"criterion {number} failed: " + "; ".join(l for l, f in checks if not f)


def test_criterion_01_closed_form_speeds():
    t0 = time.monotonic()
    checks = []

    r = halfspace.speed_halfspace(Params(D=3, d=1, gp=0.5, fp=1))
    checks.append(("c_a = 2.5 to 1e-9", abs(r.c - 2.5) <= 1e-9))
    rm = halfspace.speed_halfspace_mortality(Params(D=1, d=4, gp=1, rho=1))
    checks.append(
        ("c_(m,a) = 5/sqrt(6) to 1e-9", abs(rm.c - 5.0 / math.sqrt(6.0)) <= 1e-9)
    )

    rng = np.random.default_rng(42)
    quota = {Regime.FISHER: 0, Regime.INTERIOR: 0, Regime.ANOMALOUS: 0}
    worst = 0.0
    while min(quota.values()) < 100:
        d = rng.uniform(0.2, 3.0)
        fp = rng.uniform(0.2, 3.0)
        p = Params(D=rng.uniform(0.05, 5.0) * d, d=d, gp=rng.uniform(0.05, 3.0) * fp, fp=fp)
        res = halfspace.speed_halfspace(p)
        if quota[res.regime] >= 100:
            continue
        quota[res.regime] += 1
        worst = max(worst, res.diagnostics["overlap_gap"])
    checks.append((f"overlap vs closed form <= 1e-9 (worst {worst:.2e})", worst <= 1e-9))

    worst_m = 0.0
    for _ in range(100):
        p = Params(
            D=rng.uniform(0.1, 3.0),
            d=rng.uniform(0.1, 8.0),
            gp=rng.uniform(0.2, 3.0),
            rho=rng.uniform(0.1, 3.0),
        )
        worst_m = max(worst_m, halfspace.speed_halfspace_mortality(p).diagnostics["overlap_gap"])
    checks.append((f"mortality overlap agreement (worst {worst_m:.2e})", worst_m <= 1e-9))

    elapsed = time.monotonic() - t0
    checks.append((f"runtime {elapsed:.2f}s < 1s", elapsed < 1.0))
    report(1, "closed-form speeds + overlap cross-check", checks)


def test_criterion_02_regime_diagram():
    checks = []
    xs = np.linspace(0.1, 5.0, 50)
    ys = np.linspace(0.1, 3.0, 50)
    rows, _ = halfspace.regime_diagram(xs, ys)
    mismatches = 0
    for x, y, regime in rows:
        if y <= 2.0 - x:
            expect = Regime.FISHER
        elif x > 0.5 and y >= x / (2.0 * x - 1.0):
            expect = Regime.INTERIOR
        else:
            expect = Regime.ANOMALOUS
        mismatches += regime is not expect
    checks.append((f"50x50 grid matches boundaries exactly ({mismatches} off)", mismatches == 0))

    jump = 0.0
    for x in (0.4, 0.9, 1.3, 1.7):
        y = 2.0 - x
        lo = halfspace.speed_halfspace(Params(D=x, d=1, gp=y - 1e-6, fp=1)).c
        hi = halfspace.speed_halfspace(Params(D=x, d=1, gp=y + 1e-6, fp=1)).c
        jump = max(jump, abs(hi - lo))
    for x in (0.8, 1.4, 2.5, 4.0):
        y = x / (2.0 * x - 1.0)
        lo = halfspace.speed_halfspace(Params(D=x, d=1, gp=y - 1e-6, fp=1)).c
        hi = halfspace.speed_halfspace(Params(D=x, d=1, gp=y + 1e-6, fp=1)).c
        jump = max(jump, abs(hi - lo))
    checks.append((f"continuity across both boundaries (max jump {jump:.2e})", jump <= 1e-4))
    report(2, "regime diagram + continuity", checks)


def test_criterion_03_bessel_property_suite():
    t0 = time.monotonic()
    checks = []

    ok = True
    for tau in (-0.5, 0.0, 1.0, 2.5):
        jt = sf.first_zero_j(tau)
        rs = np.linspace(jt * 1e-3, jt * 0.999, 200)
        for eps in (1.0, 2.0):
            for alpha in (-1.0, 0.0, 1.0):
                vals = rs**alpha * sf.bessel_j(tau + eps, rs) / sf.bessel_j(tau, rs)
                ok &= bool(np.all(np.diff(vals) > 0))
    checks.append(("quotient monotonicity (eps in {1,2}, alpha in {-1,0,1})", ok))

    ok = True
    for tau in (-0.5, 0.0, 1.0):
        jt = sf.first_zero_j(tau)
        rs = np.linspace(jt * 0.02, jt * 0.97, 100)
        h = 1e-6
        slopes = np.array([(sf.h_u(tau, r + h) - sf.h_u(tau, r - h)) / (2 * h) for r in rs]) / rs
        ok &= bool(np.all(np.diff(slopes) > 0))
    checks.append(("h_u'(r)/r increasing", ok))

    ok = True
    h = 1e-6
    for tau in (0.0, 1.0, 2.5):
        for r in (0.5, 1.2, 2.0):
            dj = ((r + h) ** -tau * sf.bessel_j(tau, r + h) - (r - h) ** -tau * sf.bessel_j(tau, r - h)) / (2 * h)
            ok &= abs(dj + r**-tau * sf.bessel_j(tau + 1, r)) <= 1e-6 * max(1.0, abs(dj))
            dk = ((r + h) ** -tau * sf.bessel_k(tau, r + h) - (r - h) ** -tau * sf.bessel_k(tau, r - h)) / (2 * h)
            ok &= abs(dk + r**-tau * sf.bessel_k(tau + 1, r)) <= 1e-6 * abs(dk)
            di = ((r + h) ** -tau * sf.bessel_i(tau, r + h) - (r - h) ** -tau * sf.bessel_i(tau, r - h)) / (2 * h)
            ok &= abs(di - r**-tau * sf.bessel_i(tau + 1, r)) <= 1e-6 * abs(di)
    checks.append(("three derivative identities to 1e-6 relative", ok))

    rs = np.linspace(1e-3, 30.0, 500)
    err_low = float(np.max(np.abs(sf.h_v(-0.5, rs) - rs)))
    err_high = float(np.max(np.abs(sf.h_v(0.5, rs) - (rs + 1.0))))
    checks.append(
        (f"h_v closed forms r and r+1 to 1e-10 (err {max(err_low, err_high):.1e})",
         max(err_low, err_high) <= 1e-10)
    )

    e0 = abs(sf.first_zero_j(0.0) - 2.4048255577)
    e1 = abs(sf.first_zero_j(1.0) - 3.8317059702)
    checks.append((f"first zeros j0, j1 to 1e-8 (err {max(e0, e1):.1e})", max(e0, e1) <= 1e-8))

    elapsed = time.monotonic() - t0
    checks.append((f"runtime {elapsed:.2f}s < 10s", elapsed < 10.0))
    report(3, "Bessel property suite", checks)


def test_criterion_04_robin_eigenvalue_cross_validation():
    checks = []
    p = Params(D=1, d=1, gp=1, rho=1, mu=1, nu=1, R=1, N=2)
    eig = mortality.robin_eigenvalue(p)
    beta_trig = brentq(lambda b: b * math.tan(b) - 0.5, 1e-9, math.pi / 2 * (1 - 1e-12), rtol=8.9e-16)
    checks.append(
        (f"generic Bessel path vs trig reduction (diff {abs(eig.beta0 - beta_trig):.1e})",
         abs(eig.beta0 - beta_trig) <= 1e-8)
    )

    Rs = np.geomspace(0.1, 30.0, 50)
    vals = [mortality._beta0_fast(Params(D=1, d=1, gp=1, rho=1, mu=1, nu=1, R=float(R), N=2)) for R in Rs]
    checks.append(("beta0(R) decreasing on 50 samples", all(b < a for a, b in zip(vals, vals[1:]))))

    kappa = mortality.robin_kappa(p)
    val = 1e4 * mortality._beta0_fast(Params(D=1e4, d=1, gp=1, rho=1, mu=1, nu=1, R=1, N=2)) ** 2
    rel = abs(val - kappa * (p.N - 1) / p.R) / (kappa * (p.N - 1) / p.R)
    checks.append((f"D beta0^2 vs kappa (N-1)/R at D=1e4 (rel {rel:.2e})", rel <= 0.01))
    report(4, "Robin eigenvalue cross-validation", checks)


def test_criterion_05_cylinder_limits():
    t0 = time.monotonic()
    checks = []
    anomalous = dict(d=1.0, gp=0.5, fp=1.0, mu=1.0, nu=1.0, N=2)

    c_R100 = cylinder.speed_cylinder(Params(D=3, R=100.0, **anomalous)).c_star
    checks.append(
        (f"|c*(R=100) - 2.5|/2.5 = {abs(c_R100 - 2.5) / 2.5:.2e} < 1%", abs(c_R100 - 2.5) / 2.5 < 0.01)
    )
    c_Rtiny = cylinder.speed_cylinder(Params(D=3, R=1e-3, **anomalous)).c_star
    checks.append(
        (f"c*(R=1e-3) within 1% of c_f = 2 (rel {abs(c_Rtiny - 2) / 2:.2e})", abs(c_Rtiny - 2.0) / 2.0 < 0.01)
    )

    c0 = 3.0 / math.sqrt(2.0)
    c_Dtiny = cylinder.speed_cylinder(Params(D=1e-4, d=1, gp=3, fp=1, mu=1, nu=1, R=1, N=2)).c_star
    checks.append(
        (f"c*(D=1e-4) within 1% of c0 = 3/sqrt(2) (rel {abs(c_Dtiny - c0) / c0:.2e})",
         abs(c_Dtiny - c0) / c0 < 0.01)
    )

    scaled = [
        cylinder.speed_cylinder(Params(D=D, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)).c_star / math.sqrt(D)
        for D in (1e3, 1e4)
    ]
    rel = abs(scaled[1] - scaled[0]) / scaled[0]
    checks.append((f"c*(D)/sqrt(D) at 1e3 vs 1e4 (rel {rel:.2e}) < 2%", rel < 0.02))

    elapsed = time.monotonic() - t0
    checks.append((f"runtime {elapsed:.1f}s < 30s", elapsed < 30.0))
    report(5, "cylinder limits in R and D", checks)


def test_criterion_06_road_field_limit():
    checks = []
    p = Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
    c_rf = cylinder.road_field_speed(p).c

    c_lin = cylinder.rescaled_speed(p, lambda R: p.mu * R, 1e-3).c_star
    rel = abs(c_lin - c_rf) / c_rf
    checks.append((f"mu~(R) = mu R: |c~ - c_rf|/c_rf = {rel:.2e} < 1%", rel < 0.01))

    c_const = cylinder.rescaled_speed(p, lambda R: p.mu, 1e-3).c_star
    rel_f = abs(c_const - p.c_f) / p.c_f
    checks.append((f"constant mu~: within 1% of c_f (rel {rel_f:.2e})", rel_f < 0.01))

    p2 = Params(D=3, d=1, gp=0.5, fp=1, mu=1, nu=1, R=1, N=2)
    c_inf = halfspace.speed_halfspace(p2, cross_check=False).c
    c_quad = cylinder.rescaled_speed(p2, lambda R: p2.mu * R * R, 1e-3).c_star
    rel_i = abs(c_quad - c_inf) / c_inf
    checks.append((f"mu~ = mu R^2: within 1% of c*_inf = 2.5 (rel {rel_i:.2e})", rel_i < 0.01))
    report(6, "road-field singular limit", checks)


def test_criterion_07_truncated_convergence():
    checks = []
    p = Params(D=3, d=1, gp=0.5, fp=1, N=2)
    c_a = 2.5
    gaps = []
    for L in (10.0, 20.0, 40.0):
        cL = halfspace.truncated_speed_halfspace(p, L).c
        gaps.append(c_a - cL)
        checks.append((f"c*_L < c_a at L={L:g} (gap {c_a - cL:.3e})", cL < c_a))
    checks.append(("gap decreases monotonically", gaps[0] > gaps[1] > gaps[2]))
    checks.append((f"gap at L=40 is {gaps[2] / c_a:.2%} < 5%", gaps[2] / c_a < 0.05))
    report(7, "truncated-domain convergence", checks)


def test_criterion_08_mortality_thresholds():
    checks = []
    base = dict(D=1.0, d=4.0, gp=1.0, rho=1.0, mu=1.0, nu=1.0, N=2)
    p = Params(R=1.0, **base)
    R0 = mortality.survival_threshold_R(p)
    flips_R = (
        mortality.robin_eigenvalue(Params(R=1.01 * R0, **base)).survives
        and not mortality.robin_eigenvalue(Params(R=0.99 * R0, **base)).survives
    )
    checks.append((f"survival flips at R0 = {R0:.6f} (+-1%)", flips_R))

    baseD = dict(d=1.0, gp=1.0, rho=1.0, mu=4.0, nu=1.0, R=1.0, N=2)
    D0 = mortality.survival_threshold_D(Params(D=1.0, **baseD))
    flips_D = (
        mortality.robin_eigenvalue(Params(D=0.99 * D0, **baseD)).survives
        and not mortality.robin_eigenvalue(Params(D=1.01 * D0, **baseD)).survives
    )
    checks.append((f"survival flips at D0 = {D0:.6f} (+-1%)", flips_D))

    c_near = mortality.speed_cylinder_mortality(Params(R=1.01 * R0, **base)).c_star
    checks.append(
        (f"c*_m(1.01 R0) = {c_near:.4f} < 0.2 c_g = {0.2 * p.c_g:.4f}", c_near < 0.2 * p.c_g)
    )

    Rs = np.linspace(1.05 * R0, 10.0, 20)
    cs = [mortality.speed_cylinder_mortality(Params(R=float(R), **base)).c_star for R in Rs]
    checks.append(("c*_m increasing on a 20-point radius grid", all(b > a for a, b in zip(cs, cs[1:]))))

    c_inf = 5.0 / math.sqrt(6.0)
    c100 = mortality.speed_cylinder_mortality(Params(R=100.0, **base)).c_star
    rel = abs(c100 - c_inf) / c_inf
    checks.append((f"c*_m(R=100) within 2% of 5/sqrt(6) (rel {rel:.2e})", rel < 0.02))
    report(8, "mortality thresholds and speed", checks)


def test_criterion_09_solver_vs_simulator():
    t0 = time.monotonic()
    checks = []

    p = Params(D=2, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
    c_star = cylinder.speed_cylinder(p).c_star
    cfg = SimConfig(
        geometry="strip", p=p, nx=600, ny=190, dx=0.25, dy=0.1, T=40.0,
        init=InitSpec(kind="bump", center=0.0, radius=5.0, height=0.5),
    )
    sim = run_strip(cfg)
    rel = abs(sim.fitted_speed - c_star) / c_star
    checks.append(
        (f"strip front speed {sim.fitted_speed:.4f} vs c* = {c_star:.4f} (rel {rel:.2%}) < 10%",
         rel < 0.10)
    )

    p_ext = Params(D=1, d=1, gp=0.3, rho=1, mu=1, nu=1, R=1, N=2)
    assert not mortality.robin_eigenvalue(p_ext).survives
    ext = run_radial(
        SimConfig(geometry="radial", p=p_ext, dr=0.05, T=110.0,
                  init=InitSpec(kind="uniform", level=0.05))
    )
    checks.append(
        (f"extinction run dies out (sup {ext.diagnostics['sup_final']:.1e} < 1e-6)", ext.extinct)
    )

    p_srv = Params(D=1, d=1, gp=1, rho=1, mu=1, nu=1, R=2.0, N=2)
    srv = run_radial(
        SimConfig(geometry="radial", p=p_srv, dr=0.04, r_out=22.0, T=50.0,
                  init=InitSpec(kind="uniform", level=0.1), second_order_exchange=True)
    )
    st = mortality.radial_steady_mortality(p_srv)
    phi_ref = np.interp(srv.grid_u, st.r_in, st.phi)
    err = float(np.max(np.abs(srv.u_final - phi_ref)) / np.max(phi_ref))
    checks.append((f"survival run matches shooting profile (sup-err {err:.2%} < 1%)", err < 0.01))

    elapsed = time.monotonic() - t0
    checks.append((f"runtime {elapsed:.0f}s < 300s", elapsed < 300.0))
    report(9, "solver vs simulator oracle", checks)


def test_criterion_10_steady_states():
    checks = []

    prof = halfspace.steady_state_halfspace(Params(D=1, d=1, gp=1, fp=1, mu=2, nu=1))
    checks.append(
        (f"half-space flux residual {prof.flux_residual:.1e} <= 1e-8", prof.flux_residual <= 1e-8)
    )

    exact = halfspace.steady_state_halfspace(Params(D=1.3, d=0.6, gp=1, fp=1, mu=1.5, nu=0.75, S=2))
    checks.append(
        ("mu = nu S returns (1, S) exactly",
         exact.U0 == 1.0 and exact.V0 == 2.0 and exact.flux_residual == 0.0)
    )

    mort_prof = halfspace.steady_state_halfspace(Params(D=1, d=2, gp=1, rho=0.5, mu=1, nu=1))
    expect = mort_prof.V0 * np.exp(-math.sqrt(0.5 / 2.0) * mort_prof.y_v)
    err = float(np.max(np.abs(mort_prof.V - expect)))
    checks.append((f"mortality exterior profile V0 e^(-sqrt(rho/d) x) (err {err:.1e})", err <= 1e-8))

    p = Params(D=1, d=1, gp=1, rho=1, mu=1, nu=1, R=2.0, N=2)
    st = mortality.radial_steady_mortality(p)
    checks.append(
        (f"radial Robin residual {st.robin_residual:.1e} <= 1e-8", st.robin_residual <= 1e-8)
    )

    # uniqueness: an independent shot (different integrator and bracket)
    # lands on the same amplitude
    from scipy.integrate import solve_ivp

    kappa = mortality.robin_kappa(p)
    eps = p.R * 1e-6

    def residual(a: float) -> float:
        g = lambda s: s * (1 - s)
        y0 = [a - g(a) * eps**2 / (2 * (p.N - 1)), -g(a) * eps / (p.N - 1)]
        sol = solve_ivp(
            lambda r, y: [y[1], -(p.N - 2) / r * y[1] - g(y[0])],
            (eps, p.R), y0, method="DOP853", rtol=1e-11, atol=1e-13,
        )
        return sol.y[1, -1] + kappa * sol.y[0, -1]

    a_alt = brentq(residual, 0.4, 1 - 1e-9, rtol=8.9e-16)
    checks.append(
        (f"shot amplitude unique across brackets (diff {abs(a_alt - st.a0):.1e})",
         abs(a_alt - st.a0) <= 1e-8)
    )
    report(10, "steady states", checks)
