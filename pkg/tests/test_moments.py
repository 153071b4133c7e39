import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from erws import from_ab, make_params
from erws.errors import DegenerateError, DomainError
from erws import moments as mo
from erws.oracle import exact_joint_law, exact_moment


def mp_c(n, x):
    with mpmath.workdps(40):
        return mpmath.rf(mpmath.mpf(x) + 1, n - 1) / mpmath.factorial(n - 1)


def test_c_examples():
    assert mo.c(1, 0.37) == 1.0
    assert mo.c(2, 0.5) == 1.5
    assert mo.c(3, 1) == 3.0
    assert mo.c(2, -1) == 0.0
    assert mo.c(500, 0.0) == 1.0


@pytest.mark.parametrize("n", [2, 7, 999, 1000, 1001, 5000, 10_000, 10_001, 10**6])
@pytest.mark.parametrize("x", [-0.9, -0.3, 0.0, 0.25, 0.6, 1.0, 1.8, 3.6])
def test_c_against_mpmath(n, x):
    exact = float(mp_c(n, x))
    assert mo.c(n, x) == pytest.approx(exact, rel=1e-12)


def test_c_signed_products():
    for n, x in [(5, -2.5), (4, -3.2), (30, -1.5)]:
        exact = float(mp_c(n, x))
        assert mo.c(n, x) == pytest.approx(exact, rel=1e-12)
        assert math.copysign(1, mo.c(n, x)) == math.copysign(1, exact)


def test_mean_examples(half_stop):
    p = from_ab(0.3, 0.8, 0.2)
    assert mo.mean_S(p, 1) == pytest.approx(-0.6)
    assert mo.mean_S(from_ab(0.4, 0.8, 0.5), 50) == 0.0
    assert mo.mean_S(half_stop, 2) == 1.5
    assert mo.mean_Sigma(from_ab(0, 1, 1), 17) == pytest.approx(17)
    assert mo.mean_Sigma(from_ab(0, 0.5, 1), 2) == 1.5
    assert mo.mean_Sigma(p, 1) == 1.0


def test_second_and_higher_examples(half_stop):
    m2 = mo.second_moments(half_stop, 2)
    assert m2["e_s_sigma"] == pytest.approx(2.5)
    assert m2["e_s2"] == pytest.approx(2.5)
    assert mo.second_moments(from_ab(0.25, 0.5, 1), 2)["e_s2"] == pytest.approx(2.0)
    assert mo.second_moments(from_ab(0.1, 0.5, 1), 2)["e_sigma_sigma1"] == pytest.approx(4.0)
    m4 = mo.higher_moments(half_stop, 2)
    assert m4["e_s2_sigma"] == pytest.approx(4.5)
    assert m4["e_s4"] == pytest.approx(8.5)
    m1 = mo.higher_moments(from_ab(-0.2, 0.7, 0.1), 1)
    assert (m1["e_s2_sigma"], m1["e_s4"]) == (1.0, 1.0)


def test_covariance_examples(half_stop):
    for n in (1, 5, 40):
        assert mo.covariance_suite(from_ab(0.0, 0.7, 1), n).cov_s_sigma == 0.0
    assert mo.covariance_suite(from_ab(0.1, 0.5, 1), 2).var_sigma == pytest.approx(0.25)
    assert mo.covariance_suite(half_stop, 2).var_s == pytest.approx(0.25)


def test_rho_examples():
    p = from_ab(0.5, 0.5, 1)
    assert mo.rho_S_Sigma(p, 2) == pytest.approx(1.0)
    assert mo.rho_S2_Sigma(p, 2) == pytest.approx(1.0)
    assert mo.rho_S_Sigma(from_ab(0, 0.6, 1), 1000) == 0.0
    assert mo.rho_S_Sigma(from_ab(0.3, 0.6, 0.5), 1000) == 0.0
    with pytest.raises(DegenerateError):
        mo.rho_S2_Sigma(from_ab(0.2, 1.0, 1), 10)
    with pytest.raises(DegenerateError):
        mo.rho_S_Sigma(from_ab(0.2, 1.0, 1), 10)


def test_rho_s2_sigma_subcritical_large_n():
    from erws.asymptotics import const_Qprime
    assert mo.rho_S2_Sigma(from_ab(0.2, 0.8, 1), 10**6) == pytest.approx(
        const_Qprime(0.8), rel=0.02)


def test_critical_branch_index():
    """Only the k = 0..n-1 sum reproduces the exact second moment."""
    for a in (0.15, 0.3, 0.45):
        p = from_ab(a, 2 * a, 1)
        for n in range(1, 10):
            exact = exact_moment(exact_joint_law(p, n), 2, 0)
            assert mo.critical_e_s2(a, n) == pytest.approx(exact, rel=1e-12)
            assert mo.moment_table(p, n).e_s2 == pytest.approx(exact, rel=1e-12)
        assert mo.critical_e_s2_displayed(a, 2) != pytest.approx(1 + 4 * a, rel=1e-3)


@pytest.mark.parametrize("a,b,s", [(0.1, 0.6, 1), (-0.5, 0.9, 0), (0.4, 0.5, 0.3),
                                   (0.7, 0.9, 1), (0.0, 0.3, 1), (0.45, 0.6, 0.8)])
def test_closed_forms_match_recursion(a, b, s):
    p = from_ab(a, b, s)
    ns = [1, 2, 3, 10, 100, 1000, 10_000, 100_000]
    for rec in mo.recursion_tables(p, ns):
        cf = mo.closed_form_table(p, rec.n)
        for f in mo.MomentTable.VALUE_FIELDS:
            x, y = getattr(cf, f), getattr(rec, f)
            assert abs(x - y) <= 1e-9 * max(abs(y), 1e-300), (f, rec.n, x, y)


def test_pole_guard_and_auto():
    p = from_ab(0.2, 0.8, 1)    # 4a = b
    with pytest.raises(DomainError):
        mo.closed_form_table(p, 10)
    assert mo.moment_table(p, 10, "auto").method is mo.Method.RECURSION
    assert mo.moment_table(from_ab(0.1, 0.8, 1), 10, "auto").method is mo.Method.CLOSED_FORM
    with pytest.raises(ValueError):
        mo.moment_table(p, 10, "bogus")


def test_recursion_checkpoints_consistent():
    p = from_ab(0.35, 0.7, 0.9)
    tabs = mo.recursion_tables(p, [5, 50, 500])
    for t in tabs:
        assert t == mo.recursion_tables(p, [t.n])[0]


def test_csv_row():
    t = mo.moment_table(from_ab(0.1, 0.5, 1), 3)
    assert mo.MomentTable.CSV_HEADER == ("n", "e_s", "e_sigma", "e_s_sigma", "e_s2",
                                         "e_sigma2", "e_s2_sigma", "e_s4", "method")
    row = t.csv_row()
    assert row[0] == 3 and row[-1] == "Recursion"


@given(st.floats(0.02, 1.0), st.floats(0, 1), st.floats(0, 1), st.integers(1, 3000))
def test_jensen_and_pathwise_bounds(b, t, s, n):
    p = from_ab(-b + 2 * b * t, b, s)
    m = mo.moment_table(p, n)
    tol = 1e-9
    assert m.e_s2 >= m.e_s ** 2 * (1 - tol)
    assert m.e_sigma2 >= m.e_sigma ** 2 * (1 - tol)
    assert m.e_s4 >= m.e_s2 ** 2 * (1 - tol)
    assert abs(m.e_s) <= m.e_sigma * (1 + tol)
    assert m.e_s2 <= m.e_sigma2 * (1 + tol)


def test_partial_sum_identity():
    for x, y in [(0.9, 0.1), (0.3, -0.5), (2.0, 1.0)]:
        assert mo.partial_sum_identity_check(x, y, 2) <= 1e-15
    assert mo.partial_sum_identity_check(0.9, 0.1, 10**4) < 1e-10
    with pytest.raises(DomainError):
        mo.partial_sum_identity_check(0.4, 0.4, 10)


def test_oracle_equivalence_sample():
    """Spot check of recursion against the DP at n = 12 (full grid in acceptance)."""
    p = from_ab(0.45, 0.9, 0.0)
    law = exact_joint_law(p, 12)
    t = mo.moment_table(p, 12)
    for f, (i, j) in [("e_s", (1, 0)), ("e_sigma2", (0, 2)), ("e_s2_sigma", (2, 1)),
                      ("e_s4", (4, 0))]:
        assert getattr(t, f) == pytest.approx(exact_moment(law, i, j), rel=1e-12)


def test_sign_of_rho_large_n():
    from erws.asymptotics import const_P
    for b in (0.3, 0.6, 0.9):
        for f in (-1, -0.5, 0.25, 0.5, 0.75, 1):
            for s in (0, 1):
                p = from_ab(f * b, b, s)
                r = mo.rho_S_Sigma(p, 10**6)
                sgn = 2 * s - 1
                if f < 0.5:
                    assert np.sign(r) == np.sign(sgn * const_P(p.a, b))
                else:
                    assert np.sign(r) == sgn
