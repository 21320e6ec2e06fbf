import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsc_irdf import (
    appendix_diagnostics,
    binary_entropy,
    canonicalize,
    direct_rdf,
    dual_lower_bound,
    f_values,
    g,
    irdf,
    rstar_equation_lhs,
    solve_r_star,
    uv,
    w_values,
)
from bsc_irdf.core import DomainError, InfeasibleDistortionError, RegimeError, SourceModel
from bsc_irdf.gallager_dual import gallager_constraint, rstar_equation_lhs_prime, w_condition

from oracles import brute_force_rate, mp_g, mp_phi, table

LN7_OVER_08 = 2.4323876863191416314  # mpmath
ONE_MINUS_H2_EIGHTH = 0.45643555680040359401  # mpmath
H2_03_MINUS_H2_01 = 0.41229530564141139697  # mpmath

MODELS = [(0.1, 0.01), (0.25, 0.05), (0.4, 0.1), (0.5, 0.2), (0.3, 0.0), (0.45, 0.3)]


def hn(q):
    return binary_entropy(q, "nats")


# --- u, v -------------------------------------------------------------------


def test_uv_examples():
    c = uv(canonicalize(0.5, 0.1))
    assert c.u == pytest.approx(0.8, abs=1e-15) and c.v == pytest.approx(0.8, abs=1e-15)
    c = uv(canonicalize(0.3, 0.0))
    assert c.u == pytest.approx(1.0, abs=1e-15) and c.v == pytest.approx(1.0, abs=1e-15)
    c = uv(canonicalize(0.25, 0.05))
    assert c.u == pytest.approx(0.20 / 0.275, rel=1e-15)
    assert c.v == pytest.approx(0.70 / 0.725, rel=1e-15)


def test_uv_regime_error():
    with pytest.raises(RegimeError):
        uv(canonicalize(0.1, 0.2))
    with pytest.raises(RegimeError):
        uv(canonicalize(0.2, 0.2))


# --- phi ----------------------------------------------------------------------


@pytest.mark.parametrize("a,p", MODELS)
def test_phi_matches_high_precision_definition(a, p):
    m = canonicalize(a, p)
    for r in (1e-9, 1e-6, 1e-3, 0.05, 0.5, 1.0, 1.3, 3.0, 10.0, 60.0, 300.0):
        ref = float(mp_phi(r, a, p))
        assert rstar_equation_lhs(r, m) == pytest.approx(ref, rel=1e-11, abs=1e-15)


def test_phi_limits():
    for a, p in MODELS:
        m = canonicalize(a, p)
        assert rstar_equation_lhs(1e-8, m) == pytest.approx(0.5 - p, abs=1e-6)
        tail = rstar_equation_lhs(2000.0, m)
        assert 0.0 <= tail < 1e-200
        assert tail == pytest.approx(float(mp_phi(2000.0, a, p)), rel=1e-9, abs=1e-300)


def test_phi_symmetric_source_form():
    p = 0.1
    m = canonicalize(0.5, p)
    s = 1 - 2 * p
    for r in (0.1, 1.0, 4.0):
        expected = s / math.expm1(r * s) - 2 * s / math.expm1(2 * r * s)
        assert rstar_equation_lhs(r, m) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("a,p", MODELS)
def test_phi_strictly_decreasing_and_derivative(a, p):
    m = canonicalize(a, p)
    rs = np.geomspace(1e-4, 200.0, 400)
    vals = [rstar_equation_lhs(r, m) for r in rs]
    assert all(y1 < y0 for y0, y1 in zip(vals, vals[1:]) if y0 > 1e-250)
    for r in (1e-3, 0.2, 1.0, 2.5, 8.0):
        h = 1e-6 * r
        fd = (rstar_equation_lhs(r + h, m) - rstar_equation_lhs(r - h, m)) / (2 * h)
        assert rstar_equation_lhs_prime(r, m) == pytest.approx(fd, rel=1e-5, abs=1e-12)
        assert rstar_equation_lhs_prime(r, m) < 0


def test_phi_rejects_nonpositive_r():
    m = canonicalize(0.25, 0.05)
    for r in (0.0, -1.0, float("nan")):
        with pytest.raises(DomainError):
            rstar_equation_lhs(r, m)


# --- g ------------------------------------------------------------------------


@pytest.mark.parametrize("a,p", MODELS)
def test_g_matches_high_precision_definition(a, p):
    m = canonicalize(a, p)
    D = p + 0.4 * (a - p)
    for r in (1e-7, 1e-3, 0.4, 2.0, 25.0, 400.0):
        assert g(r, m, D) == pytest.approx(float(mp_g(r, a, p, D)), rel=1e-12, abs=1e-14)


def test_g_symmetric_source_equals_entropy_of_delta():
    p, D = 0.1, 0.2
    m = canonicalize(0.5, p)
    r = math.log((1 - p - D) / (D - p)) / (1 - 2 * p)
    assert g(r, m, D) == pytest.approx(hn((D - p) / (1 - 2 * p)), abs=1e-14)


def test_g_vanishes_at_lossless_point_for_large_r():
    for a, p in MODELS:
        m = canonicalize(a, p)
        c = uv(m)
        assert abs(g(50.0 / min(c.u, c.v), m, p)) < 1e-9


def test_g_noiseless_reduction():
    D = 0.1
    m = canonicalize(0.3, 0.0)
    assert g(math.log((1 - D) / D), m, D) == pytest.approx(hn(0.1), abs=1e-15)


# --- solver ---------------------------------------------------------------------


def test_solve_symmetric_closed_form():
    sol = solve_r_star(canonicalize(0.5, 0.1), 0.2)
    assert sol.r_star == pytest.approx(LN7_OVER_08, abs=1e-10)
    assert sol.rate == pytest.approx(ONE_MINUS_H2_EIGHTH, abs=1e-12)
    assert abs(sol.residual) <= 1e-12
    lo, hi = sol.bracket
    assert lo <= sol.r_star <= hi


def test_solve_noiseless():
    sol = solve_r_star(canonicalize(0.3, 0.0), 0.1)
    assert sol.r_star == pytest.approx(math.log(9), abs=1e-10)


def test_solve_continuity_at_alpha():
    assert solve_r_star(canonicalize(0.25, 0.05), 0.24999).rate < 1e-4


def test_solve_regimes():
    m = canonicalize(0.25, 0.05)
    with pytest.raises(InfeasibleDistortionError):
        solve_r_star(m, 0.05)
    with pytest.raises(InfeasibleDistortionError):
        solve_r_star(m, 0.01)
    zero = solve_r_star(m, 0.25)
    assert zero.rate == 0.0 and zero.regime == "zero-rate" and zero.f0 is None
    with pytest.raises(RegimeError):
        solve_r_star(canonicalize(0.1, 0.2), 0.15)
    with pytest.raises(DomainError):
        solve_r_star(m, 0.1, tol=0.0)


def test_solve_extreme_distortions():
    m = canonicalize(0.25, 0.05)
    near_p = solve_r_star(m, 0.05 + 1e-12)
    assert near_p.rate == pytest.approx(binary_entropy(m.beta), abs=1e-9)
    near_half = solve_r_star(canonicalize(0.5, 0.05), 0.5 - 1e-9)
    assert near_half.r_star > 0 and near_half.rate < 1e-12


# --- f, w certificates --------------------------------------------------------


@pytest.mark.parametrize("a,p", MODELS)
def test_f_values_make_constraints_tight(a, p):
    m = canonicalize(a, p)
    for r in (0.01, 0.5, 2.0, 9.0, 40.0):
        f = f_values(r, m)
        assert min(f) > 0
        for s in gallager_constraint(r, m, f):
            assert s == pytest.approx(1.0, abs=1e-12)


def test_f_values_noiseless():
    for r in (0.3, 1.0, 5.0):
        f0, f1 = f_values(r, canonicalize(0.3, 0.0))
        assert f0 == pytest.approx(1 / (1 + math.exp(-r)), rel=1e-15)
        assert f1 == pytest.approx(1 / (1 + math.exp(-r)), rel=1e-15)


@pytest.mark.parametrize("a,p", MODELS)
def test_f_based_bound_equals_g_based_bound(a, p):
    m = canonicalize(a, p)
    D = p + 0.3 * (a - p)
    for r in (0.2, 1.0, 3.0):
        f0, f1 = f_values(r, m)
        via_f = hn(m.beta) + m.beta_bar * math.log(f0) + m.beta * math.log(f1) - r * D
        assert via_f == pytest.approx(hn(m.beta) - g(r, m, D), abs=1e-13)


@pytest.mark.parametrize("a,p", MODELS)
def test_w_values_solve_the_optimality_condition(a, p):
    m = canonicalize(a, p)
    d, Q = table(a, p)
    for r in (0.05, 0.7, 2.0, 11.0):
        f = f_values(r, m)
        # independent route: solve the 2x2 linear system numerically
        M = np.exp(-r * d)
        w_ref = np.linalg.solve(M, Q / np.array(f))
        w = w_values(r, m)
        np.testing.assert_allclose(w, w_ref, rtol=1e-9, atol=1e-12)
        assert sum(w) == pytest.approx(1.0, abs=1e-12)
        for s in w_condition(r, m, f, w):
            assert s == pytest.approx(1.0, abs=1e-12)


def test_w_values_examples():
    for p in (0.0, 0.1, 0.3):
        for r in (0.1, 1.0, 10.0):
            w0, w1 = w_values(r, canonicalize(0.5, p))
            assert w0 == pytest.approx(0.5, abs=1e-12) and w1 == pytest.approx(0.5, abs=1e-12)
    m = canonicalize(0.25, 0.05)
    w0, w1 = w_values(500.0, m)
    assert w0 == pytest.approx(m.beta_bar, abs=1e-12) and w1 == pytest.approx(m.beta, abs=1e-12)
    sol = solve_r_star(m, 0.1)
    assert sol.w0 > 0 and sol.w1 > 0


def test_w_monotone_in_r():
    m = canonicalize(0.25, 0.05)
    rs = np.geomspace(1e-3, 50, 200)
    w = np.array([w_values(r, m) for r in rs])
    assert np.all(np.diff(w[:, 0]) < 0)
    assert np.all(np.diff(w[:, 1]) > 0)
    assert w[0, 1] < -10


def test_w1_vanishes_exactly_at_alpha():
    m = canonicalize(0.25, 0.05)
    sols = [solve_r_star(m, D) for D in (0.2, 0.24, 0.249, 0.2499)]
    w1s = [s.w1 for s in sols]
    assert all(w > 0 for w in w1s)
    assert all(b < a for a, b in zip(w1s, w1s[1:]))
    assert w1s[-1] < 1e-3


# --- irdf ---------------------------------------------------------------------


def test_irdf_examples():
    assert irdf(canonicalize(0.5, 0.1), 0.2) == pytest.approx(ONE_MINUS_H2_EIGHTH, abs=1e-12)
    assert irdf(canonicalize(0.3, 0.0), 0.1) == pytest.approx(H2_03_MINUS_H2_01, abs=1e-12)
    assert irdf(canonicalize(0.25, 0.05), 0.25) == 0.0
    m = canonicalize(0.25, 0.05)
    assert irdf(m, 0.05) == binary_entropy(m.beta)
    with pytest.raises(InfeasibleDistortionError):
        irdf(m, 0.049)
    assert irdf(canonicalize(0.1, 0.2), 0.1) == 0.0
    with pytest.raises(InfeasibleDistortionError):
        irdf(canonicalize(0.1, 0.2), 0.09)
    assert irdf(SourceModel(0.0, 0.0), 0.0) == 0.0


def test_irdf_bases():
    m = canonicalize(0.4, 0.1)
    assert irdf(m, 0.2, "nats") == pytest.approx(irdf(m, 0.2, "bits") * math.log(2), rel=1e-14)


@pytest.mark.parametrize(
    "a,p,D", [(0.25, 0.05, 0.1), (0.4, 0.1, 0.2), (0.1, 0.01, 0.05), (0.5, 0.2, 0.3), (0.45, 0.3, 0.44), (0.2, 0.15, 0.16)]
)
def test_irdf_matches_brute_force_minimization(a, p, D):
    assert irdf(canonicalize(a, p), D, "nats") == pytest.approx(brute_force_rate(a, p, D), abs=1e-9)


def test_irdf_monotone_convex_in_D():
    for a, p in MODELS:
        m = canonicalize(a, p)
        Ds = np.linspace(p, a, 60)
        R = np.array([irdf(m, D) for D in Ds])
        assert np.all(np.diff(R) <= 1e-14)
        slopes = np.diff(R) / np.diff(Ds)
        assert np.all(np.diff(slopes) >= -1e-9)


def test_duality_slope():
    eps = 1e-5
    for a, p in MODELS:
        m = canonicalize(a, p)
        for D in np.linspace(p, a, 9)[1:-1]:
            fd = -(irdf(m, D + eps, "nats") - irdf(m, D - eps, "nats")) / (2 * eps)
            assert fd == pytest.approx(solve_r_star(m, D).r_star, abs=1e-3)


def test_boundary_continuity():
    for a, p in MODELS:
        m = canonicalize(a, p)
        assert irdf(m, p + 1e-5) == pytest.approx(binary_entropy(m.beta), abs=1e-3)
        assert irdf(m, a - 1e-5) == pytest.approx(0.0, abs=1e-4)


def test_feasibility_and_monotonicity_properties():
    alphas = (0.1, 0.25, 0.4, 0.5)
    ps = (0.0, 0.01, 0.05, 0.1, 0.2)
    for a in alphas:
        for D in np.linspace(0.0, 0.5, 51):
            prev = None
            for p in ps:
                m = canonicalize(a, p)
                if D < min(p, a):
                    with pytest.raises(InfeasibleDistortionError):
                        irdf(m, D)
                    continue
                R = irdf(m, D)
                if D >= a:
                    assert R == 0.0
                assert R >= direct_rdf(a, D) - 1e-12
                if p == 0.0:
                    assert R == pytest.approx(direct_rdf(a, D), abs=1e-10)
                if prev is not None:
                    assert R >= prev - 1e-12
                prev = R


# --- lower bound and auxiliary functions ------------------------------------------


def test_dual_lower_bound():
    m = canonicalize(0.25, 0.05)
    D = 0.1
    sol = solve_r_star(m, D)
    R = irdf(m, D)
    assert dual_lower_bound(sol.r_star, m, D) == pytest.approx(R, abs=1e-14)
    assert dual_lower_bound(sol.r_star / 2, m, D) < R - 1e-6
    assert dual_lower_bound(sol.r_star * 2, m, D) < R - 1e-6
    assert dual_lower_bound(1e4, m, D) < -100


def test_auxiliary_a_is_negative():
    for a, p in [(0.1, 0.01), (0.25, 0.05), (0.4, 0.1), (0.4, 0.2)]:
        m = canonicalize(a, p)
        for D in np.linspace(p, a, 7)[1:-1]:
            for r in (0.5, 1, 2, 5, 10):
                assert appendix_diagnostics(r, m, D).a < 0


def test_auxiliary_b_minus_a_closed_form():
    m = canonicalize(0.25, 0.05)
    c = uv(m)
    K = m.alpha * m.alpha_bar * (1 - 2 * m.p) / (m.beta * m.beta_bar)
    for r in (0.5, 2.0, 10.0):
        diag = appendix_diagnostics(r, m, 0.1)
        expected = m.beta_bar * c.v * (1 - math.exp(-r * (K - c.u))) / math.expm1(r * c.u)
        assert diag.b - diag.a == pytest.approx(expected, rel=1e-10)


def test_auxiliary_delta():
    for p in (0.0, 0.1, 0.3):
        for r in (0.1, 1.0, 10.0):
            assert appendix_diagnostics(r, canonicalize(0.5, p), 0.4).delta == pytest.approx(0.0, abs=1e-15)
    for a, p in [(0.1, 0.01), (0.25, 0.05), (0.4, 0.2)]:
        m = canonicalize(a, p)
        c = uv(m)
        deltas = [appendix_diagnostics(r, m, a).delta for r in np.geomspace(0.01, 30, 50)]
        assert all(d > 0 for d in deltas)
        assert all(d1 < d0 for d0, d1 in zip(deltas, deltas[1:]))
        assert abs(appendix_diagnostics(100 / min(c.u, c.v), m, a).delta) < 1e-8


def test_delta_is_gap_to_symmetric_objective():
    m = canonicalize(0.25, 0.05)
    D = 0.12
    s = 1 - 2 * m.p
    for r in (0.3, 3.0):
        g_sym = r * (D - m.p) + math.log1p(math.exp(-r * s))
        assert appendix_diagnostics(r, m, D).delta == pytest.approx(g(r, m, D) - g_sym, abs=1e-14)


# --- randomized invariants --------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(
    st.floats(0.02, 0.5),
    st.floats(0.0, 0.98),
    st.floats(0.01, 0.99),
)
def test_solution_invariants(a, p_frac, d_frac):
    p = a * p_frac
    D = p + (a - p) * d_frac
    m = canonicalize(a, p)
    if not p < D < a:
        return
    sol = solve_r_star(m, D)
    assert abs(sol.residual) <= 1e-12
    assert sol.f0 > 0 and sol.f1 > 0
    assert sol.constraint_residual < 1e-10
    if a < 0.5:
        assert sol.w0 > 0 and sol.w1 > -1e-12
    assert sol.rate == pytest.approx(max(binary_entropy(m.beta) - sol.g_value / math.log(2), 0), abs=1e-15)
    assert sol.rate >= 0
