"""End-to-end acceptance criteria. Each test records one PASS/FAIL line that is
printed in the terminal summary."""
import numpy as np
import pytest

from conftest import TABLE1_STATE, random_params, random_state
from custdyn.analysis import compare_full_reduced, verify_population_law
from custdyn.config import preset
from custdyn.equilibrium import cubic_coeffs, equilibria_wom, equilibrium_no_referral, solve_cubic
from custdyn.integrate import IntegratorConfig, integrate, integrate_to_steady
from custdyn.model import (derive_constants, full_field, jacobian_full, jacobian_reduced, rhs_full,
                           rhs_reduced)
from custdyn.stability import classify, eigenvalues4, perturbation_test
from test_equilibrium import scan_roots
from test_integrate import fixed_step_error
from test_model import entrywise_rel, fd_jacobian, near_table1

pytestmark = pytest.mark.acceptance

N_INF = 24420.0


def cfg_for(params, **kw):
    return IntegratorConfig.for_scale(derive_constants(params).n_inf, **kw)


def test_ac1_population_law(table1, criterion):
    traj = integrate(full_field(table1), TABLE1_STATE, 0.0, 500.0, cfg_for(table1))
    const_dev = float(np.max(np.abs(traj.states.sum(axis=1) - N_INF) / N_INF))
    x0 = np.array(TABLE1_STATE) * 30000.0 / N_INF
    law_dev = verify_population_law(integrate(full_field(table1), x0, 0.0, 500.0, cfg_for(table1)), table1)
    ok = const_dev <= 1e-6 and law_dev <= 1e-6
    criterion("AC1 population law", ok, f"N=24420 dev {const_dev:.2e}; N0=30000 dev {law_dev:.2e}; tol 1e-6")
    assert ok


def test_ac2_regime_switch(table1, criterion):
    left = preset("fig1-left").params
    right = preset("fig1-right").params
    tau_l = derive_constants(table1.replace(lambda2=1e-5)).tau
    tau_r = derive_constants(table1.replace(lambda2=1e-5, m=30.0, m_r=10.0)).tau
    tau_ok = abs(tau_l / 0.01285 - 1) <= 1e-3 and abs(tau_r / 2.583 - 1) <= 1e-3

    eq_l = equilibria_wom(left)
    eq_r = equilibria_wom(right)
    pattern_l = [(e.provenance, classify(left, e).classification) for e in eq_l]
    pattern_r = [(e.provenance, classify(right, e).classification) for e in eq_r]
    eig_ok = (pattern_l == [("wom-extinction", "stable")]
              and pattern_r == [("wom-extinction", "unstable"), ("wom-interior", "stable")])
    dyn_l = [perturbation_test(left, e, 1e-3).returns_to_eq for e in eq_l]
    dyn_r = [perturbation_test(right, e, 1e-3).returns_to_eq for e in eq_r]
    dyn_ok = dyn_l == [True] and dyn_r == [False, True]
    ok = tau_ok and eig_ok and dyn_ok
    criterion("AC2 regime switch", ok,
              f"tau {tau_l:.5f} / {tau_r:.4f}; (40,0) {pattern_l}; (30,10) {pattern_r}; "
              f"perturbation returns {dyn_l} / {dyn_r}")
    assert ok


def test_ac3_wom_interior(criterion):
    params = preset("fig1-right").params
    _, interior = equilibria_wom(params)
    s = np.array(interior.state)
    printed = np.array([188.97, 149.67, 23986.8, 94.53])
    # the quoted C value is 188.9565 to six figures; half a unit in the last quoted place
    # everywhere else, and 0.02 on C
    near_printed = np.all(np.abs(s - printed) <= np.array([0.02, 0.005, 0.05, 0.005]))
    sum_ok = abs(s.sum() - N_INF) <= 1e-6 * N_INF
    resid_ok = interior.residual <= 1e-8 * max(1.0, params.gamma)
    res = integrate_to_steady(full_field(params), TABLE1_STATE, cfg_for(params))
    reach = float(np.max(np.abs(res.state - s)) / np.max(np.abs(s)))
    flagged = not interior.formula_match["C"] and not interior.formula_match["P_C"]
    ok = near_printed and sum_ok and resid_ok and res.converged and reach <= 1e-4 and flagged
    criterion("AC3 WOM interior equilibrium", ok,
              f"state ({s[0]:.4f}, {s[1]:.4f}, {s[2]:.2f}, {s[3]:.4f}); residual {interior.residual:.1e}; "
              f"integration gap {reach:.1e}; printed C/P_C formulas flagged {flagged}")
    assert ok


def test_ac4_no_referral_global(no_referral, criterion):
    eq = equilibrium_no_referral(no_referral)
    s = np.array(eq.state)
    near_printed = np.all(np.abs(s - np.array([1000.2, 10.08, 23176.0, 233.6]))
                          <= np.array([0.05, 0.005, 0.05, 0.05]))
    rng = np.random.default_rng(2024)
    worst = 0.0
    f = full_field(no_referral)
    for _ in range(10):
        x0 = rng.dirichlet(np.ones(4)) * rng.uniform(0.1, 3.0) * N_INF
        final = integrate(f, x0, 0.0, 2000.0, cfg_for(no_referral)).final
        worst = max(worst, float(np.max(np.abs(final - s)) / np.max(np.abs(s))))
    rep = classify(no_referral, eq)
    eigs = rep.eigenvalues
    real_neg = bool(np.all(eigs.imag == 0) and np.all(eigs.real < 0))
    P = no_referral
    second = -P.epsilon - P.lambda5 - P.lambda7
    has_eps = np.min(np.abs(eigs - (-0.01))) <= 1e-8
    has_second = np.min(np.abs(eigs - second)) <= 1e-8 and abs(second - (-0.0102018)) <= 5e-8
    ok = near_printed and worst <= 1e-6 and real_neg and has_eps and has_second
    criterion("AC4 no-referral global stability", ok,
              f"state ({s[0]:.2f}, {s[1]:.3f}, {s[2]:.1f}, {s[3]:.2f}); worst gap of 10 runs {worst:.1e}; "
              f"eigenvalues {np.sort(eigs.real)}")
    assert ok


def test_ac5_reduced_equivalence(criterion):
    fig6 = preset("fig6")
    res6 = compare_full_reduced(fig6.params, fig6.initial, 500.0)
    q6 = sorted(res6.condition3.quotients)
    cond_ok = (res6.condition3_satisfied and abs(res6.condition3_value - 1.62) <= 5e-3
               and abs(q6[1] - 5.68) <= 5e-3)
    diff_ok = res6.sup_diff_end <= 1e-3 * N_INF
    fig3 = preset("fig3")
    res3 = compare_full_reduced(fig3.params, fig3.initial, 500.0)
    decays = (not res3.condition3_satisfied) and res3.sup_diff_end < res3.diff_series.max()
    ok = cond_ok and diff_ok and decays
    criterion("AC5 reduced-system equivalence", ok,
              f"fig6 condition {res6.condition3_value:.4f} (quotients {q6[0]:.4f}, {q6[1]:.4f}), "
              f"sum at t=500 {res6.sup_diff_end:.3g} <= {1e-3 * N_INF:.2f}; fig3 condition "
              f"{res3.condition3_value:.3f} unsatisfied, sum {res3.diff_series.max():.3g} -> {res3.sup_diff_end:.3g}")
    assert ok


def test_ac6_qualitative(table1, criterion):
    base = integrate_to_steady(full_field(table1), TABLE1_STATE, cfg_for(table1))
    split = table1.replace(m=30.0, m_r=10.0)
    moved = integrate_to_steady(full_field(split), TABLE1_STATE, cfg_for(split))
    c_base, c_split = float(base.state[0]), float(moved.state[0])
    ratio_c0 = c_split / TABLE1_STATE[0]
    ratio_base = c_split / c_base
    ok = base.converged and moved.converged and c_base < TABLE1_STATE[0] and 1.6 <= ratio_c0 <= 2.4
    criterion("AC6 qualitative reproduction", ok,
              f"C_inf (40,0) {c_base:.2f} < 2200; C_inf (30,10) {c_split:.2f}; "
              f"ratio to C0 {ratio_c0:.3f} in [1.6, 2.4]; ratio to (40,0) level {ratio_base:.3f}")
    assert ok


def test_ac7_property_suites(table1, criterion):
    rng = np.random.default_rng(7)
    # conservation and substitution on 1000 draws each
    worst_cons = worst_sub = 0.0
    for _ in range(1000):
        p = random_params(rng)
        x = random_state(rng, p)
        J = jacobian_full(p, x)
        scale = p.gamma + float(np.sum(np.abs(J) * np.abs(x)))
        worst_cons = max(worst_cons, abs(sum(rhs_full(p, x)) - (p.gamma - p.epsilon * x.sum())) / scale)
        k = derive_constants(p)
        full = rhs_full(p, (x[0], x[1], k.q - x[0], k.p - x[1]))
        red = rhs_reduced(p, x[:2], k)
        Jr = jacobian_full(p, (x[0], x[1], k.q - x[0], k.p - x[1]))
        sub_scale = p.gamma + float(np.sum(np.abs(Jr) * np.abs([x[0], x[1], k.q - x[0], k.p - x[1]])))
        worst_sub = max(worst_sub, max(abs(red.Ca - full.C), abs(red.Ra - full.R)) / sub_scale)

    # finite-difference Jacobians, 100 draws at Table-1 parameters and 100 near them
    worst_fd_t1 = worst_fd_near = 0.0
    for _ in range(100):
        x = random_state(rng, table1)
        worst_fd_t1 = max(worst_fd_t1, entrywise_rel(fd_jacobian(lambda y: rhs_full(table1, y), x),
                                                     jacobian_full(table1, x)))
        p = near_table1(rng, table1)
        k = derive_constants(p)
        x = random_state(rng, p)
        worst_fd_near = max(
            worst_fd_near,
            entrywise_rel(fd_jacobian(lambda y: rhs_full(p, y), x), jacobian_full(p, x)),
            entrywise_rel(fd_jacobian(lambda y: rhs_reduced(p, y, k), x[:2]), jacobian_reduced(p, x[:2], k)))

    # cubic roots against a sign-scan oracle at resolution p * 1e-6
    cubic_ok = True
    for _ in range(100):
        p = random_params(rng)
        k = derive_constants(p)
        co = cubic_coeffs(p, k)
        got, ref = solve_cubic(co, k.p), scan_roots(co, k.p)
        cubic_ok &= len(got) == len(ref) and all(abs(a - b) <= k.p * 1e-6 for a, b in zip(got, ref))

    # eigenvalue trace and determinant identities on 100 random matrices
    worst_tr = worst_det = 0.0
    for _ in range(100):
        M = rng.normal(size=(4, 4))
        e = eigenvalues4(M)
        tr, det = np.trace(M), np.linalg.det(M)
        worst_tr = max(worst_tr, abs(e.sum() - tr) / max(abs(tr), 1e-300))
        worst_det = max(worst_det, abs(np.prod(e) - det) / max(abs(det), 1e-300))

    order = fixed_step_error(2.0) / fixed_step_error(1.0)

    parts = {
        "conservation": worst_cons <= 1e-12,
        "substitution": worst_sub <= 1e-12,
        "fd-jacobian": worst_fd_t1 <= 1e-5 and worst_fd_near <= 1e-5,
        "cubic-vs-scan": cubic_ok,
        "trace/det": worst_tr <= 1e-8 and worst_det <= 1e-6,
        "rk4-order": 12 <= order <= 20,
    }
    ok = all(parts.values())
    criterion("AC7 property suites", ok,
              f"conservation {worst_cons:.1e}; substitution {worst_sub:.1e}; fd {worst_fd_t1:.1e}/"
              f"{worst_fd_near:.1e}; cubic {cubic_ok}; trace {worst_tr:.1e} det {worst_det:.1e}; "
              f"order ratio {order:.2f}")
    assert ok, parts
