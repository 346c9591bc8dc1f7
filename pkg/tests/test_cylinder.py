"""Cylinder curve machinery, tangency speeds, limits, road-field reduction."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from kppspeeds import cylinder as cyl
from kppspeeds.halfspace import speed_halfspace
from kppspeeds.params import DomainError, Params, Regime, UnsupportedDimensionError


def trig_speed_n2(p: Params, rtol: float = 1e-12) -> float:
    """Independent N=2 solver: closed trigonometric ratio maps only.

    h_u(r) = r tan r and h_v(r) = r, so the exchange matching gives
    delta(beta) = chi_u(beta)/d in closed form; the smallest speed with
    intersecting regions is found by a self-contained bisection.
    """
    D, d, mu, nu, R = p.D, p.d, p.mu, p.nu, p.R
    gp, fp = p.gp, p.fp
    c_f, c_g = 2 * math.sqrt(d * fp), 2 * math.sqrt(D * gp)
    beta_bar = brentq(lambda r: r * math.tan(r) - mu * R / D, 1e-12, math.pi / 2 * (1 - 1e-12)) / R

    def delta(beta: float) -> float:
        h = beta * R * math.tan(beta * R)
        den = mu * R - D * h
        if den <= 0:
            return math.inf
        return nu * D * h / den / d

    def gap_grid(c: float, lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
        b = np.linspace(lo, hi, n)
        h = b * R * np.tan(b * R)
        den = mu * R - D * h
        dl = np.where(den > 0, nu * D * h / np.where(den > 0, den, 1.0) / d, np.inf)
        ext = c * c - c_f * c_f - 4 * d * d * dl * dl
        arg = c * c - c_g * c_g + 4 * D * D * b * b
        ok = (ext >= 0) & (arg >= 0)
        ad_lo = (c - np.sqrt(np.maximum(ext, 0))) / (2 * d)
        ad_hi = (c + np.sqrt(np.maximum(ext, 0))) / (2 * d)
        aD_lo = np.maximum(0.0, (c - np.sqrt(np.maximum(arg, 0))) / (2 * D))
        aD_hi = (c + np.sqrt(np.maximum(arg, 0))) / (2 * D)
        gaps = np.where(ok, np.maximum(aD_lo - ad_hi, ad_lo - aD_hi), np.inf)
        return b, gaps

    def overlapping(c: float) -> bool:
        if c <= c_f:
            return False
        lo, hi = 1e-9, beta_bar * (1 - 1e-9)
        best = math.inf
        for _ in range(3):
            b, gaps = gap_grid(c, lo, hi, 4001)
            i = int(np.argmin(gaps))
            best = min(best, float(gaps[i]))
            lo, hi = b[max(0, i - 1)], b[min(len(b) - 1, i + 1)]
        return best <= 0.0

    lo, hi = c_f, 2 * math.sqrt(max(D, d) * max(gp, fp)) + 1
    if overlapping(lo * (1 + 1e-13)):
        return lo
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if overlapping(mid):
            hi = mid
        else:
            lo = mid
    return hi


class TestCurves:
    def test_n2_closed_forms(self):
        p = Params(D=1, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
        cv = cyl.build_curves(p)
        # beta_bar solves r tan r = mu R / D
        assert cv.beta_bar * math.tan(cv.beta_bar) == pytest.approx(1.0, abs=1e-10)
        assert cv.beta_under == 0.0
        for b in (0.1, 0.3, 0.5, 0.7):
            chi = b * math.tan(b) / (1.0 - b * math.tan(b))
            assert cv.delta(b) == pytest.approx(chi, rel=1e-8)
        assert cv.delta(0.5) == pytest.approx(0.37580203998910794, rel=1e-8)

    def test_window_floor_for_higher_dimensions(self):
        for N in (2, 3):
            p = Params(D=1.7, d=0.8, gp=1, fp=1, mu=1.2, nu=0.9, R=1.4, N=N)
            assert cyl.build_curves(p).beta_under == 0.0
        for N in (4, 5):
            p = Params(D=1.7, d=0.8, gp=1, fp=1, mu=1.2, nu=0.9, R=1.4, N=N)
            cv = cyl.build_curves(p)
            assert 0.0 < cv.beta_under < cv.beta_bar
            # defining relation h_u(beta_under R) = (mu R / D) d(N-3)/(nu R + d(N-3))
            from kppspeeds.specfun import h_u

            rhs = (p.mu * p.R / p.D) * p.d * (N - 3) / (p.nu * p.R + p.d * (N - 3))
            assert h_u(p.tau, cv.beta_under * p.R) == pytest.approx(rhs, abs=1e-10)

    def test_delta_increasing_with_matching_residual(self):
        from kppspeeds.specfun import h_v

        p = Params(D=2, d=1.3, gp=1, fp=1, mu=1, nu=1, R=1, N=4)
        cv = cyl.build_curves(p)
        betas = np.linspace(
            cv.beta_under + 1e-4, cv.beta_bar * (1 - 1e-4), 200
        )
        deltas = cv.delta(betas)
        assert np.all(np.diff(deltas) > 0)
        chi_v = p.d / p.R * h_v(p.tau, deltas * p.R)
        chi_u = cv.chi_u(betas)
        assert np.max(np.abs(chi_v - chi_u) / np.maximum(1.0, chi_u)) <= 1e-10

    def test_delta_monotone_in_radius(self):
        # beta fixed inside the admissible window of every radius tested
        beta = 0.2
        vals = []
        for R in (0.8, 1.0, 1.5, 2.5):
            p = Params(D=2, d=1, gp=1, fp=1, mu=1, nu=1, R=R, N=2)
            vals.append(cyl.build_curves(p).delta(beta))
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_gamma_positive(self):
        p = Params(D=2, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=3)
        cv = cyl.build_curves(p)
        for b in np.linspace(cv.beta_under + 1e-3, cv.beta_bar * 0.999, 40):
            assert cv.gamma(float(b)) > 0

    def test_domain_errors(self):
        p = Params(D=1, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=4)
        cv = cyl.build_curves(p)
        with pytest.raises(DomainError):
            cv.delta(cv.beta_under * 0.5)
        with pytest.raises(DomainError):
            cv.delta(cv.beta_bar * 1.01)


class TestEnhancement:
    def test_planar_threshold(self):
        assert cyl.enhancement_test(Params(D=1.5, d=1, gp=1, fp=1, N=2))
        assert not cyl.enhancement_test(Params(D=1, d=1, gp=1, fp=1, N=2))  # boundary

    def test_large_D_wins_for_n4(self):
        p = Params(D=1e3, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=4)
        assert cyl.enhancement_test(p)

    def test_profile_all_when_reactions_allow(self):
        # R sqrt(fp/d) >= j_tau and 2 fp <= gp: enhanced for every D
        p = Params(D=1, d=1, gp=3, fp=1, mu=1, nu=1, R=4.0, N=4)
        prof = cyl.enhancement_profile(p)
        assert prof.kind == "all" and prof.D_bar == 0.0

    def test_profile_threshold_consistent(self):
        p = Params(D=1, d=1, gp=1, fp=1, mu=1, nu=1, R=4.0, N=4)
        prof = cyl.enhancement_profile(p)
        assert prof.kind == "above_threshold" and prof.D_bar > 0
        below = Params(D=prof.D_bar * 0.95, d=1, gp=1, fp=1, mu=1, nu=1, R=4.0, N=4)
        above = Params(D=prof.D_bar * 1.05, d=1, gp=1, fp=1, mu=1, nu=1, R=4.0, N=4)
        assert not cyl.enhancement_test(below)
        assert cyl.enhancement_test(above)

    def test_profile_nonconnected_set(self):
        # R small, gp between 2 fp and 2 fp - M/d: the enhanced set has a gap
        base = dict(d=1.0, fp=1.0, mu=1.0, nu=1.0, R=0.5)
        probe = cyl.enhancement_profile(Params(D=1, gp=1, N=4, **base))
        gp_mid = 2.0 - 0.5 * probe.minimum
        prof = cyl.enhancement_profile(Params(D=1, gp=gp_mid, N=4, **base))
        assert prof.kind == "complement_interval"
        assert 0 < prof.D1 <= prof.D2
        assert cyl.enhancement_test(Params(D=prof.D1 * 0.8, gp=gp_mid, N=4, **base))
        assert not cyl.enhancement_test(
            Params(D=0.5 * (prof.D1 + prof.D2), gp=gp_mid, N=4, **base)
        )
        assert cyl.enhancement_test(Params(D=prof.D2 * 1.2, gp=gp_mid, N=4, **base))

    def test_zeta_convexity(self):
        p = Params(D=1, d=1, gp=1, fp=1, mu=1, nu=1, R=0.5, N=4)
        Ds = np.linspace(0.05, 8.0, 60)
        z = np.array([cyl._zeta(p, float(D)) for D in Ds])
        assert np.all(np.diff(z, 2) >= -1e-8)


class TestSpeed:
    def test_boundary_gives_fisher(self):
        for mu, nu, R in ((1.0, 1.0, 1.0), (2.0, 0.5, 3.0)):
            p = Params(D=1, d=1, gp=1, fp=1, mu=mu, nu=nu, R=R, N=2)
            r = cyl.speed_cylinder(p)
            assert r.c_star == 2.0 and not r.enhanced

    def test_enhanced_case_against_trig_path(self):
        p = Params(D=2, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
        r = cyl.speed_cylinder(p)
        assert r.enhanced and r.c_star > 2.0
        assert abs(r.c_star - trig_speed_n2(p)) <= 1e-8 * r.c_star

    def test_witness_on_both_curves(self):
        p = Params(D=2, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
        r = cyl.speed_cylinder(p)
        assert abs(r.diagnostics["residual_interior"]) <= 1e-8
        assert abs(r.diagnostics["residual_exterior"]) <= 1e-8

    def test_contact_beyond_window_floor(self):
        for N in (4, 5):
            p = Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1, R=2.0, N=N)
            r = cyl.speed_cylinder(p)
            assert r.enhanced
            assert r.beta_star > r.diagnostics["beta_under"]

    def test_overlap_predicate_monotone(self):
        p = Params(D=2, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
        curves = cyl.build_curves(p)
        cf2 = p.c_f**2
        c_star = cyl.speed_cylinder(p).c_star
        flags = [
            cyl._region_gap(curves, c, cf2, 0.0, 256)[0] <= 0
            for c in np.linspace(2.001, c_star * 1.5, 25)
        ]
        first_true = flags.index(True)
        assert all(flags[first_true:])
        assert not any(flags[:first_true])

    def test_speed_at_least_fisher_and_flag_consistency(self):
        rng = np.random.default_rng(5)
        for _ in range(12):
            p = Params(
                D=rng.uniform(0.3, 4.0),
                d=1.0,
                gp=rng.uniform(0.3, 2.0),
                fp=1.0,
                mu=rng.uniform(0.3, 2.0),
                nu=rng.uniform(0.3, 2.0),
                R=rng.uniform(0.3, 2.0),
                N=2,
            )
            r = cyl.speed_cylinder(p)
            assert r.c_star >= p.c_f - 1e-12
            assert r.enhanced == (r.c_star - p.c_f > 1e-9)
            assert r.enhanced == cyl.enhancement_test(p)

    def test_extreme_exchange_rates(self):
        # heavy drainage pins c* just above c_f; weak drainage (or strong
        # inflow) pushes it toward the interior Fisher speed; the witness
        # stays on the curves even in the nearly degenerate contact
        for mu, nu in ((1e-4, 1.0), (1e4, 1.0), (1.0, 1e-4), (1.0, 1e4)):
            p = Params(D=2, d=1, gp=1, fp=1, mu=mu, nu=nu, R=1, N=2)
            r = cyl.speed_cylinder(p)
            assert p.c_f <= r.c_star <= p.c_g + 1e-9
            assert abs(r.diagnostics["residual_interior"]) <= 1e-8
            assert abs(r.diagnostics["residual_exterior"]) <= 1e-8

    def test_large_radius_reaches_halfspace_speed_in_higher_dimensions(self):
        # integer and half-integer Bessel orders agree with the flat-interface
        # limit; complements the N=2 trigonometric cross-check
        for N in (3, 4, 5):
            p = Params(D=3, d=1, gp=0.5, fp=1, mu=1, nu=1, R=60.0, N=N)
            c = cyl.speed_cylinder(p).c_star
            assert abs(c - 2.5) / 2.5 < 0.005, N

    def test_radius_monotonicity_when_enhanced(self):
        cs = []
        for R in (0.5, 1.0, 2.0, 4.0, 8.0):
            p = Params(D=2, d=1, gp=1, fp=1, mu=1, nu=1, R=R, N=2)
            cs.append(cyl.speed_cylinder(p).c_star)
        assert all(b >= a - 1e-9 for a, b in zip(cs, cs[1:]))
        assert cs[-1] > cs[0] + 1e-6  # strict over well-separated radii

    def test_high_dimension_certificate_and_error(self):
        p_flat = Params(D=1, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=8)
        r = cyl.speed_cylinder(p_flat)
        assert r.c_star == p_flat.c_f and not r.enhanced
        p_enh = Params(D=60, d=1, gp=1, fp=1, mu=1, nu=1, R=2.0, N=6)
        assert cyl.enhancement_test(p_enh)
        with pytest.raises(UnsupportedDimensionError):
            cyl.speed_cylinder(p_enh)


class TestLimits:
    def test_small_D_closed_form(self):
        p = Params(D=1, d=1, gp=3, fp=1)
        assert cyl.speed_limit_D(p, "D_TO_0") == pytest.approx(3.0 / math.sqrt(2.0), rel=1e-12)
        p_eq = Params(D=1, d=1, gp=2, fp=1)
        assert cyl.speed_limit_D(p_eq, "D_TO_0") == pytest.approx(2.0, rel=1e-12)
        p_low = Params(D=1, d=1, gp=1.2, fp=1)
        assert cyl.speed_limit_D(p_low, "D_TO_0") == p_low.c_f

    def test_large_D_extrapolation_consistent(self):
        p = Params(D=1, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
        lim = cyl.speed_limit_D(p, "D_TO_INF")
        at_largest = cyl.speed_cylinder(
            Params(D=1e4, d=1, gp=1, fp=1, mu=1, nu=1, R=1, N=2)
        ).c_star / math.sqrt(1e4)
        assert lim == pytest.approx(at_largest, rel=0.02)
        assert lim > 0

    def test_radius_limits_dispatch(self):
        p = Params(D=3, d=1, gp=0.5, fp=1, mu=1, nu=1, R=1, N=2)
        assert cyl.speed_limit_R(p, "R_TO_0") == p.c_f
        assert cyl.speed_limit_R(p, "R_TO_INF") == speed_halfspace(p, cross_check=False).c

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            cyl.speed_limit_R(Params(D=1, d=1, gp=1, fp=1), "SIDEWAYS")


class TestRoadField:
    def test_fisher_region(self):
        r = cyl.road_field_speed(Params(D=1, d=1, gp=1, fp=1))
        assert r.c == 2.0 and r.regime is Regime.FISHER

    def test_enhanced_value_bracketed(self):
        r = cyl.road_field_speed(Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1))
        assert 2.0 < r.c < 4.0  # between c_f and the interior Fisher speed 2 sqrt(D)

    def test_monotone_in_D(self):
        cs = [
            cyl.road_field_speed(Params(D=D, d=1, gp=1, fp=1, mu=1, nu=1)).c
            for D in (1.5, 2.0, 3.0, 4.5, 6.0)
        ]
        assert all(b >= a - 1e-10 for a, b in zip(cs, cs[1:]))


class TestRescaled:
    def test_matches_plain_cylinder(self):
        p = Params(D=4, d=1, gp=1, fp=1, mu=0.7, nu=1, R=0.5, N=2)
        direct = cyl.speed_cylinder(p).c_star
        via = cyl.rescaled_speed(
            Params(D=4, d=1, gp=1, fp=1, mu=123.0, nu=1, R=9.0, N=2),
            lambda R: 0.7,
            0.5,
        ).c_star
        assert via == pytest.approx(direct, rel=1e-12)

    def test_planar_only(self):
        with pytest.raises(DomainError):
            cyl.rescaled_speed(Params(D=4, d=1, gp=1, fp=1, N=4), lambda R: R, 0.1)


class TestMaxEffectDimension:
    def test_window_floor_grows_with_dimension(self):
        bus = []
        for N in range(4, 40):
            p = Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1, R=2.0, N=N)
            bus.append(cyl.build_curves(p).beta_under)
        assert all(b > a for a, b in zip(bus, bus[1:]))

    def test_threshold_dimension(self):
        p = Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1, R=2.0)
        n0 = cyl.max_effect_dimension(p)
        assert n0 >= 4
        assert not cyl.enhancement_test(
            Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1, R=2.0, N=n0)
        )
        if n0 > 4:
            assert cyl.enhancement_test(
                Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1, R=2.0, N=n0 - 1)
            )

    def test_strong_interior_reaction_extends_reach(self):
        weak = cyl.max_effect_dimension(Params(D=4, d=1, gp=1, fp=1, mu=1, nu=1, R=2.0))
        strong = cyl.max_effect_dimension(Params(D=4, d=1, gp=3.9, fp=1, mu=1, nu=1, R=2.0))
        assert strong > weak
