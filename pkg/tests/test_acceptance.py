"""Acceptance gate: one test per criterion, pass/fail visible per line.

All criteria run on the reference parameter set (d,r,h,k) = (1,1,0.5,0.5)
unless stated otherwise.  Heavy artifacts (the critical speed, the T=300
spreading run, the vanishing run) are computed once per module and shared.
"""
import math
import time

import numpy as np
import pytest

from spreadfront import (
    CompetitionParams,
    SemiWaveConfig,
    SemiWaveProfile,
    StefanConfig,
    classify_threshold_gamma,
    critical_speed,
    decay_fit,
    linearization_roots,
    make_initial_data,
    perturbed_speed,
    sandwich,
    simulate,
    solve_kpp,
    solve_semiwave,
    speed_for_gamma,
)
from spreadfront.oracle import fine_reference_run, residual

P = CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.5)
P_SCALAR = CompetitionParams(d=1.0, r=1.0, h=0.5, k=0.0, scalar_mode=True)
U_STAR = 2.0 / 3.0
GAMMAS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 32.0, 128.0)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"\n[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def c_star():
    return critical_speed(P)


@pytest.fixture(scope="module")
def gamma_speeds():
    return {g: speed_for_gamma(P, g)[0] for g in GAMMAS}


@pytest.fixture(scope="module")
def headline_run():
    cfg = StefanConfig()
    init = make_initial_data(3.0, amplitude=0.5, v_inf=1.0, cfg=cfg, p=P)
    return simulate(P, 1.0, init, 300.0, cfg)


@pytest.fixture(scope="module")
def vanishing_run():
    cfg = StefanConfig()
    init = make_initial_data(1.0, amplitude=0.5, v_inf=1.0, cfg=cfg, p=P)
    return simulate(P, 1e-3, init, 300.0, cfg)


def test_criterion_01_semiwave_residuals_and_monotonicity():
    worst = 0.0
    for c in (0.0, 0.5, 1.0):
        t0 = time.time()
        sol = solve_semiwave(P, c)
        elapsed = time.time() - t0
        assert isinstance(sol, SemiWaveProfile)
        rep = residual(sol, P, c)
        worst = max(worst, rep.sup_residual)
        i0 = int(np.searchsorted(sol.s_grid, 0.0))
        assert np.all(np.diff(sol.phi[i0:]) > -1e-10), f"phi not monotone at c={c}"
        assert np.all(np.diff(sol.psi) < 1e-10), f"psi not monotone at c={c}"
        assert abs(sol.phi[-1] - U_STAR) < 1e-3
        assert abs(sol.psi[-1] - U_STAR) < 1e-3  # v* = u* for this p
        assert elapsed <= 30.0, f"solve at c={c} took {elapsed:.1f}s"
    _report(1, worst <= 1e-6, f"sup residual over c in (0, 0.5, 1): {worst:.3e}")


def test_criterion_02_critical_speed_bracket(c_star):
    lo, hi = 2.0 * math.sqrt(0.5), 2.0 * math.sqrt(2.0 / 3.0)
    tight = critical_speed(P, SemiWaveConfig(fp_tol=1e-9))
    ok = lo <= c_star <= hi and abs(tight - c_star) <= 2e-3
    _report(2, ok, f"c* = {c_star:.6f} in [{lo:.6f}, {hi:.6f}], "
                   f"tighter fp_tol shift {abs(tight - c_star):.2e}")


def test_criterion_03_slope_and_speed_monotonicity(c_star, gamma_speeds):
    slopes = [solve_semiwave(P, c).phi_slope_at_0
              for c in (0.0, 0.25, 0.5, 0.75, 1.0)]
    slopes_ok = all(a > b for a, b in zip(slopes, slopes[1:]))
    cg = [gamma_speeds[g] for g in GAMMAS]
    speeds_ok = all(a < b for a, b in zip(cg, cg[1:]))
    bounded_ok = all(c < c_star for c in cg)
    gaps = [c_star - c for c in cg]
    gaps_ok = all(a > b for a, b in zip(gaps, gaps[1:]))
    ok = slopes_ok and speeds_ok and bounded_ok and gaps_ok
    _report(3, ok, f"slopes decreasing: {slopes_ok}, c_gamma increasing: "
                   f"{speeds_ok}, bounded by c*: {bounded_ok}, gaps "
                   f"shrinking: {gaps_ok}")


def test_criterion_04_collapse_toward_critical_speed(c_star):
    # the profile family collapses to (0,1) locally uniformly as c rises to
    # c*; measured as sup phi over the fixed window s in [0, 20] (over the
    # whole half-line sup phi is identically u* for every c < c*)
    sups = []
    for eps in (0.1, 0.05, 0.025):
        sol = solve_semiwave(P, c_star - eps)
        assert isinstance(sol, SemiWaveProfile)
        window = sol.s_grid <= 20.0
        sups.append(float(sol.phi[window].max()))
    ok = sups[0] > sups[1] > sups[2] and sups[2] < 0.1
    _report(4, ok, f"sup phi on [0,20] at c*-(0.1,0.05,0.025): "
                   f"{sups[0]:.4f} > {sups[1]:.4f} > {sups[2]:.4f} -> 0")


def test_criterion_05_headline_speed_crosscheck(gamma_speeds, headline_run):
    c_g = gamma_speeds[1.0]
    assert headline_run.classification == "Spreading"
    coarse_disc = abs(headline_run.speed_estimate - c_g) / c_g
    # refinement comparison against a tighter bisection reference
    c_ref = speed_for_gamma(P, 1.0, SemiWaveConfig(c_tol=1e-5))[0]
    cfg = StefanConfig()
    init = make_initial_data(3.0, amplitude=0.5, v_inf=1.0, cfg=cfg, p=P)
    coarse_120 = simulate(P, 1.0, init, 120.0, cfg)
    fine_120 = fine_reference_run(P, 1.0, init, 120.0, cfg)
    d_coarse = abs(coarse_120.speed_estimate - c_ref) / c_ref
    d_fine = abs(fine_120.speed_estimate - c_ref) / c_ref
    ok = coarse_disc <= 0.05 and d_fine < d_coarse
    _report(5, ok, f"g(t) slope vs c_gamma: {coarse_disc:.2%} (<=5%), "
                   f"refinement {d_coarse:.2e} -> {d_fine:.2e}")


def test_criterion_06_dichotomy(vanishing_run):
    cfg_fast = StefanConfig(stop_on_classify=True)
    spreading_ok = True
    for gamma in (0.01, 1.0, 100.0):
        init = make_initial_data(3.0, amplitude=0.5, v_inf=1.0, cfg=cfg_fast, p=P)
        out = simulate(P, gamma, init, 150.0, cfg_fast)
        spreading_ok &= out.classification == "Spreading"
    van = vanishing_run
    g_cap = math.pi / (2.0 * math.sqrt(0.5)) + 0.1
    vanish_ok = (van.classification == "Vanishing"
                 and float(van.u_sup_series[-1]) < 1e-4
                 and van.final_state.v[0] > 0.99
                 and van.final_state.g <= g_cap)
    init1 = make_initial_data(1.0, amplitude=0.5, v_inf=1.0, cfg=cfg_fast, p=P)
    g_star = classify_threshold_gamma(P, init1, cfg_fast)
    up = simulate(P, 1.2 * g_star, init1, 150.0, cfg_fast).classification
    dn = simulate(P, 0.8 * g_star, init1, 300.0, cfg_fast).classification
    threshold_ok = up == "Spreading" and dn == "Vanishing"
    ok = spreading_ok and vanish_ok and threshold_ok
    _report(6, ok, f"spreading for 3 gammas: {spreading_ok}, vanishing "
                   f"criteria: {vanish_ok}, gamma* = {g_star:.3f} "
                   f"separates: {threshold_ok}")


def test_criterion_07_long_time_limits(headline_run, vanishing_run):
    u0 = headline_run.final_state.u_hat[0]
    v0 = headline_run.final_state.v[0]
    spread_ok = abs(u0 - U_STAR) <= 0.02 and abs(v0 - U_STAR) <= 0.02
    fs = vanishing_run.final_state
    x_v = fs.dx_v * np.arange(fs.v.size)
    near = x_v <= 3.0
    vanish_ok = (float(np.max(fs.u_hat)) < 1e-4
                 and float(np.min(fs.v[near])) > 0.98)
    ok = spread_ok and vanish_ok
    _report(7, ok, f"(u,v)(0,300) = ({u0:.4f}, {v0:.4f}) vs (2/3, 2/3); "
                   f"vanishing state near (0,1) on [0,3]: {vanish_ok}")


def test_criterion_08_perturbed_speed_sandwich(gamma_speeds):
    c_g = gamma_speeds[1.0]
    gaps_lo, gaps_hi = [], []
    ordered = True
    for eps in (0.04, 0.02, 0.01):
        c_lo = perturbed_speed(P, 1.0, eps, "lower")
        c_hi = perturbed_speed(P, 1.0, eps, "upper")
        ordered &= c_lo < c_g < c_hi
        gaps_lo.append(c_g - c_lo)
        gaps_hi.append(c_hi - c_g)
    shrink = (gaps_lo[0] > gaps_lo[1] > gaps_lo[2]
              and gaps_hi[0] > gaps_hi[1] > gaps_hi[2])
    ok = ordered and shrink
    _report(8, ok, f"ordered: {ordered}, gaps shrink with eps: {shrink} "
                   f"(lower {gaps_lo}, upper {gaps_hi})")


def test_criterion_09_decay_rate():
    sol = solve_semiwave(P, 0.0)
    assert isinstance(sol, SemiWaveProfile)
    hat2 = linearization_roots(P, 0.0).hat_mu[1]
    fitted = decay_fit(sol, P)
    rel = abs(fitted - hat2) / abs(hat2)
    _report(9, rel <= 0.05,
            f"fitted tail rate {fitted:.5f} vs -1/sqrt(3) = {hat2:.5f} "
            f"({rel:.2%})")


def test_criterion_10_scalar_consistency():
    cfg = StefanConfig(skip_v=True)
    init = make_initial_data(3.0, amplitude=0.5, v_inf=1.0, cfg=cfg, p=P_SCALAR)
    out = simulate(P_SCALAR, 1.0, init, 300.0, cfg)
    c_g = speed_for_gamma(P_SCALAR, 1.0)[0]
    rel = abs(out.speed_estimate - c_g) / c_g
    prof = solve_kpp(1.0, 1.0, 1.0, 0.0)
    exact = 1.0 * math.sqrt(1.0 / 3.0)
    slope_err = abs(prof.slope_at_0 - exact)
    ok = rel <= 0.02 and slope_err <= 1e-4
    _report(10, ok, f"k=0 front speed vs scalar c_gamma: {rel:.2%} (<=2%), "
                    f"c=0 slope error vs b*sqrt(ab/3d): {slope_err:.2e}")


def test_criterion_11_comparison_principle():
    cfg = StefanConfig(n_u=400)
    rng = np.random.default_rng(42)
    ok = True
    for _ in range(5):
        amp_lo = float(rng.uniform(0.2, 0.45))
        amp_hi = amp_lo + float(rng.uniform(0.05, 0.3))
        lo = simulate(P, 1.0, make_initial_data(3.0, amplitude=amp_lo,
                                                cfg=cfg, p=P), 30.0, cfg)
        hi = simulate(P, 1.0, make_initial_data(3.0, amplitude=amp_hi,
                                                cfg=cfg, p=P), 30.0, cfg)
        ok &= bool(np.all(hi.series["g"] >= lo.series["g"] - 1e-6))
        ok &= bool(np.all(hi.series["u_at_0"] >= lo.series["u_at_0"] - 1e-6))
        ok &= bool(np.all(hi.series["v_at_0"] <= lo.series["v_at_0"] + 1e-6))
    _report(11, ok, "5 ordered pairs keep (g, u) up and v down at every "
                    "output time within 1e-6")


def test_criterion_12_sandwich_recurrence(headline_run):
    it = sandwich(P, 12)
    gap = it.upper_u - it.lower_u
    ratio_ok = all(
        abs(gap[i] - P.h * P.k * gap[i - 2]) <= 1e-12 for i in range(2, 12)
    )
    box = sandwich(P, 6)
    u0 = headline_run.final_state.u_hat[0]
    v0 = headline_run.final_state.v[0]
    box_ok = (box.lower_u[-1] - 0.02 <= u0 <= box.upper_u[-1] + 0.02
              and box.lower_v[-1] - 0.02 <= v0 <= box.upper_v[-1] + 0.02)
    ok = ratio_ok and box_ok
    _report(12, ok, f"gap ratio hk to 1e-12: {ratio_ok}; late-time "
                    f"(u,v)(0) in n=6 box +-0.02: {box_ok}")
