"""Acceptance criteria, each run at its stated tolerance with a printed PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from conftest import CANONICAL, canonical_id, fields_for, front_for
from frontlab.evans import (circle_contour, default_rectangle, evans, evans_derivative_at_zero,
                            melnikov_gamma, melnikov_prediction, rectangle_contour,
                            companion_equivalence_check, third_derivative,
                            translation_eigenvalue_residual, winding_number)
from frontlab.model import cubic_model, eval_potential
from frontlab.profile import (find_gamma_star, logistic_candidate, minmax_bracket, shooting_mismatch,
                              speed_from_gamma, tail_log_slope, decay_rates)
from frontlab.resolvent import ResolventGrid, manufactured_error, stationary_grid, verify_bounds
from frontlab.spectrum import (SIDES, asymptotic_data, curve_agreement, dispersion_curves,
                               spectral_gap, surviving_branch, tau_zero_curve)
from frontlab.timestepper import (envelope_decreasing, measure_decay_rate, measure_front_speed,
                                  simulate, step_initial_state, uniform_grid)
from oracles import logistic_front

ALPHAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


@pytest.mark.xfail(strict=True, reason="printed closed form sqrt(2/kappa)(alpha-1/2) holds only at "
                   "kappa=1; the computed speed follows sqrt(2 kappa)(alpha-1/2) (see README)")
def test_01_closed_form_speed(report):
    t0 = time.perf_counter()
    worst, worst_fixed = 0.0, 0.0
    for kappa in (0.5, 1.0, 2.0):
        for a in ALPHAS:
            g = find_gamma_star(cubic_model(a, kappa=kappa))
            worst = max(worst, abs(g - math.sqrt(2 / kappa) * (a - 0.5)))
            worst_fixed = max(worst_fixed, abs(g - math.sqrt(2 * kappa) * (a - 0.5)))
    dt = time.perf_counter() - t0
    ok = report(1, worst <= 1e-6 and dt < 5,
                f"closed-form speed: max|gamma* - sqrt(2/kappa)(alpha-1/2)| = {worst:.3e} (tol 1e-6); "
                f"vs sqrt(2 kappa)(alpha-1/2): {worst_fixed:.3e}; {dt:.2f} s (< 5 s)")
    assert ok


def test_02_bracket(report):
    t0 = time.perf_counter()
    g = find_gamma_star(cubic_model(0.3, "cattaneo-maxwell", 1.0))
    dt = time.perf_counter() - t0
    ok = report(2, -0.40 < g < -0.32 and dt < 2,
                f"cattaneo-maxwell tau=1 alpha=0.3: gamma* = {g:.7f} in (-0.40, -0.32); {dt:.2f} s (< 2 s)")
    assert ok


def test_03_profile_oracle(report):
    worst, worst_rate = 0.0, 0.0
    for kappa in (1.0, 2.0):
        for a in (0.2, 0.3, 0.5, 0.7):
            model, front = front_for(a, kappa=kappa)
            worst = max(worst, float(np.max(np.abs(front.U - logistic_front(a, kappa, front.xi)))))
            em, ep = decay_rates(model, front)
            for side, rate in (("minus", em), ("plus", ep)):
                worst_rate = max(worst_rate, abs(tail_log_slope(front, side) / rate - 1))
    ok = report(3, worst <= 1e-5 and worst_rate <= 0.02,
                f"logistic sup error {worst:.2e} (tol 1e-5); tail-slope rate mismatch {worst_rate:.2e} (tol 2%)")
    assert ok


def test_04_structural_laws(report):
    n, bad = 0, []
    for a in ALPHAS:
        for tau in (0.0, 0.25, 0.5, 1.0):
            for kind in ("constant-one", "cattaneo-maxwell"):
                m = cubic_model(a, kind, tau)
                c = speed_from_gamma(find_gamma_star(m), tau)
                diff = eval_potential(m, 1.0) - eval_potential(m, 0.0)
                sign_ok = abs(c) < 1e-8 if abs(diff) < 1e-14 else np.sign(c) == np.sign(diff)
                n += 1
                if not (c * c * tau < 1 and sign_ok):
                    bad.append((a, tau, kind, c))
    ok = report(4, n >= 50 and not bad,
                f"c*^2 tau < 1 and sign(c*) = sign(F(1)-F(0)) on {n} cases; violations: {len(bad)}")
    assert ok


def test_05_essential_gap(report):
    xi = np.linspace(-50, 50, 10001)
    lines, ok = [], True
    for label, case in (("case-I", (0.3, "cattaneo-maxwell", 1.0)), ("case-II", (0.3, "constant-one", 1.0))):
        model, front = front_for(*case)
        data = asymptotic_data(model, front)
        chi0 = spectral_gap(data).chi0
        maxre = max(c.max_real for s in SIDES for c in dispersion_curves(data, s, xi))
        agree = max(float(np.max(curve_agreement(data, s, xi))) for s in SIDES)
        ok &= maxre <= -chi0 + 1e-9 and agree <= 1e-9
        lines.append(f"{label}: max Re = {maxre:.6f} vs -chi0 = {-chi0:.6f}, formula agreement {agree:.1e}")
    assert report(5, ok, "; ".join(lines))


@pytest.mark.xfail(strict=True, reason="the tau=1e-8 root differs from the tau=0 curve by "
                   "~tau (|a|+xi^2)^2/b, i.e. 1.01e-4 at |xi|=10 (see README)")
def test_06_tau_zero_reduction(report):
    xi = np.linspace(-10, 10, 2001)
    worst = 0.0
    for a, kind in ((0.3, "constant-one"), (0.3, "cattaneo-maxwell"), (0.5, "constant-one")):
        model, front = front_for(a, kind, 1e-8)
        data = asymptotic_data(model, front)
        for s in SIDES:
            worst = max(worst, float(np.max(np.abs(surviving_branch(data, s, xi) - tau_zero_curve(data, s, xi)))))
    ok = report(6, worst <= 1e-4, f"tau=1e-8 surviving curve vs tau=0 curve on |xi|<=10: max dev {worst:.4e} (tol 1e-4)")
    assert ok


@pytest.mark.parametrize("case", CANONICAL, ids=canonical_id)
def test_07_evans_zero_structure(case, report):
    t0 = time.perf_counter()
    model, front = front_for(*case)
    fields = fields_for(*case)
    D0, scale = evans(fields, 0.0, return_scale=True)
    disk = winding_number(fields, circle_contour(0.0, 0.05)).winding
    left, R, M = default_rectangle(fields)
    rect = winding_number(fields, rectangle_contour(left, R, M)).winding
    dt = time.perf_counter() - t0
    ok = report(7, abs(D0) <= 1e-8 * scale and disk == 1 and rect - disk == 0 and dt < 60,
                f"{canonical_id(case)}: |D(0)|/scale = {abs(D0) / scale:.1e}, disk winding {disk}, "
                f"rectangle minus disk {rect - disk}; {dt:.1f} s (< 60 s)")
    assert ok


def test_08_melnikov(report):
    gammas = []
    for a in (0.1, 0.3, 0.5, 0.7, 0.9):
        for kind, tau in (("constant-one", 0.0), ("constant-one", 1.0), ("cattaneo-maxwell", 0.5),
                          ("cattaneo-maxwell", 1.0)):
            model, front = front_for(a, kind, tau)
            gammas.append(melnikov_gamma(fields_for(a, kind, tau), front))
    _, stat = front_for(0.5)
    g_stat = melnikov_gamma(fields_for(0.5), stat)
    consistent = True
    for case in CANONICAL:
        fields = fields_for(*case)
        d1 = evans_derivative_at_zero(fields)
        pred = melnikov_prediction(fields, front_for(*case)[1], melnikov_gamma(fields, front_for(*case)[1]))
        consistent &= d1 != 0 and np.sign(d1) == np.sign(pred)
    ok = report(8, min(gammas) > 0 and abs(g_stat - math.sqrt(0.5) / 6) <= 1e-4 and consistent,
                f"min Gamma over {len(gammas)} cases = {min(gammas):.4f} > 0; stationary Gamma = {g_stat:.8f} "
                f"vs {math.sqrt(0.5) / 6:.8f}; D'(0) sign consistent: {consistent}")
    assert ok


def test_09_resolvent(report):
    def b_func(x):
        return 1.5 + 0.5 * np.tanh(x)
    errs = []
    for n in (400, 800, 1600):
        g = ResolventGrid(15.0, n, np.zeros(n - 1), 1.0)
        errs.append(manufactured_error(ResolventGrid(15.0, n, b_func(g.x), 1.0), 2 + 1j, b_func))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    model, front = front_for(0.5, "cattaneo-maxwell", 1.0)
    reps = [verify_bounds(stationary_grid(model, front, n, 15.0), trials=20, seed=0) for n in (1000, 2000)]
    halving = reps[0].halving
    change = max(abs(getattr(reps[0], k) / getattr(reps[1], k) - 1) for k in ("vuprime_max", "uell2_max"))
    ok = (np.all(np.abs(orders - 2) < 0.2) and len(halving) >= 3
          and all(0.425 <= h <= 0.575 for h in halving) and change < 0.05)
    assert report(9, ok, f"manufactured orders {np.round(orders, 3).tolist()}; halving ratios "
                         f"{[round(h, 3) for h in halving]} (0.5 +- 15%); refinement change {change:.1e} (< 5%)")


def test_10_pde_cross_validation(report):
    parts, ok = [], True
    for case in CANONICAL:
        model, front = front_for(*case)
        pts = 1024 if model.tau == 0 else 4096
        traj = simulate(model, step_initial_state(uniform_grid(60, pts), model.alpha), 100.0, every=0.5)
        speed = measure_front_speed(traj, model.alpha)
        if abs(front.c_star) < 1e-8:
            good = abs(speed) < 1e-3
        else:
            good = abs(speed - front.c_star) <= 0.02 * abs(front.c_star)
        ok &= good
        parts.append(f"{canonical_id(case)} {speed:+.5f}/{front.c_star:+.5f}")
    model, front = front_for(0.3)
    chi0 = spectral_gap(asymptotic_data(model, front)).chi0
    dec = measure_decay_rate(model, front, chi0, points=512)
    ok &= dec.passed and envelope_decreasing(dec.deviation)
    assert report(10, ok, "lab speed vs c*: " + ", ".join(parts)
                  + f"; tau=0 decay rate {dec.rate:.3f} >= 0.5 chi0 = {0.5 * chi0:.3f} (heuristic threshold)")


def test_11_property_suites(report):
    t0 = time.perf_counter()
    checks = {}
    mono = True
    for case in ((0.3, "constant-one", 0.0), (0.3, "cattaneo-maxwell", 1.0), (0.7, "constant-one", 1.0)):
        m = cubic_model(*case)
        g0 = find_gamma_star(m)
        h = np.array([shooting_mismatch(m, g) for g in np.linspace(g0 - 0.3, g0 + 0.3, 13)])
        mono &= bool(np.all(np.diff(h) > 0) or np.all(np.diff(h) < 0))
    checks["shooting monotone"] = mono
    inside = True
    for case in ((0.3, "constant-one", 1.0), (0.3, "cattaneo-maxwell", 1.0), (0.7, "cattaneo-maxwell", 0.5)):
        model, front = front_for(*case)
        for rate in (0.3, 0.7, 1.0, 2.0):
            lo, hi = minmax_bracket(model, logistic_candidate(model.alpha, rate, np.linspace(-25 / rate, 25 / rate, 4001)))
            inside &= lo <= front.gamma_star + 1e-9 <= hi + 2e-9
    checks["min-max bracket"] = inside
    res_t, res_c = 0.0, 0.0
    for case in CANONICAL:
        model, front = front_for(*case)
        fields = fields_for(*case)
        res_t = max(res_t, translation_eigenvalue_residual(fields, front))
        if model.tau > 0:
            comp, system = companion_equivalence_check(fields, 0.0, front.U_x, front.U_xx,
                                                       third_derivative(model, front))
            res_c = max(res_c, comp, system)
    checks["translation residual"] = res_t < 1e-6
    checks["companion residual"] = res_c < 1e-8
    integral = True
    for case in CANONICAL[:3]:
        fields = fields_for(*case)
        for contour in (circle_contour(0.0, 0.05), circle_contour(1.0 + 1j, 0.5)):
            w = winding_number(fields, contour)
            integral &= abs(w.raw - round(w.raw)) < 1e-6
    checks["winding integrality"] = integral
    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 180
    assert report(11, ok, ", ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in checks.items())
                  + f" (translation {res_t:.1e}, companion {res_c:.1e}); {dt:.1f} s (< 180 s)")
