from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hankel_p3.errors import DomainError, PrecisionFailure
from hankel_p3.hankel_core import (compute_recurrence, gaussian_table, hankel_determinant, hermite_logD0,
                                   logdet_t_derivative, polynomial_coeffs)
from hankel_p3.moments import Family, WeightSpec, build_moment_table
from hankel_p3.precision import PrecisionConfig, to_mpf

P = PrecisionConfig(256, 64)
TOL = P.tolerance


def rec_at(t, n_max, order=0, prec=P, split=True):
    return compute_recurrence(gaussian_table(t, n_max, prec, order), n_max, prec, order, split=split)


def test_examples_t1():
    rec = rec_at(1, 2)
    sp, e2 = mpmath.sqrt(mpmath.pi), mpmath.exp(-2)
    assert abs(rec.h[0] - sp * e2) < 1e-70
    assert abs(rec.h[1] - sp * e2 * 1.5) < 1e-70
    assert abs(rec.beta[1] - 1.5) < 1e-70
    assert abs(rec.p_coeff[2] + 1.5) < 1e-70
    assert rec.beta[0] == 0 and rec.p_coeff[0] == 0 and rec.p_coeff[1] == 0


def test_hermite_limit():
    rec = rec_at(0, 4)
    for n in range(1, 5):
        assert abs(rec.beta[n] - mpmath.mpf(n) / 2) <= TOL


@pytest.mark.parametrize("t", ["0.01", "0.5", "3"])
def test_hankel_determinant_closed_forms(t):
    tab = gaussian_table(t, 3, P, 0)
    st_ = mpmath.sqrt(to_mpf(t))
    lnsp = mpmath.log(mpmath.pi) / 2
    assert abs(hankel_determinant(tab, 1, P) - (lnsp - 2 * st_)) <= TOL
    assert abs(hankel_determinant(tab, 2, P) - (2 * lnsp - 4 * st_ + mpmath.log(st_ + 0.5))) <= TOL
    with pytest.raises(DomainError):
        hankel_determinant(tab, 0, P)


def test_unperturbed_determinant():
    rec = rec_at(0, 6)
    for n in range(1, 7):
        expect = mpmath.fsum(mpmath.log(mpmath.sqrt(mpmath.pi) * mpmath.factorial(j) / 2 ** j) for j in range(n))
        assert abs(rec.logD[n] - expect) <= TOL * max(1, abs(expect))
        assert abs(hermite_logD0(n, P) - expect) <= TOL * max(1, abs(expect))


def test_polynomial_coeffs_examples():
    rec = rec_at(1, 4)
    assert polynomial_coeffs(rec, 0).coeffs == (1,)
    assert list(polynomial_coeffs(rec, 1).coeffs) == [0, 1]
    c = polynomial_coeffs(rec, 2).coeffs
    assert c[2] == 1 and c[1] == 0 and abs(c[0] + 1.5) < 1e-70


@pytest.mark.parametrize("n", [3, 4, 5])
def test_polynomial_invariants_and_linear_system_oracle(n):
    rec = rec_at("0.8", 6)
    c = polynomial_coeffs(rec, n).coeffs
    assert c[n] == 1 and c[n - 1] == 0
    assert abs(c[n - 2] - rec.p_coeff[n]) <= TOL
    ref = oracles.monic_poly(n, "0.8", 70)
    assert all(abs(a - b) < mpmath.mpf(10) ** -55 for a, b in zip(c, ref))


@pytest.mark.parametrize("t", ["0.1", "1", "10"])
def test_bareiss_oracle(t):
    rec = rec_at(t, 8)
    for n in range(1, 9):
        ref = oracles.gaussian_logdet(n, t, 4 * 77)
        assert abs(rec.logD[n] - ref) <= TOL * max(1, abs(ref))


@pytest.mark.parametrize("t", ["0.05", "2"])
def test_trace_oracle(t):
    tab = gaussian_table(t, 6, P, 2)
    for n in (1, 3, 6):
        d1, d2 = oracles.trace_logdet_derivs(n, t, 90)
        assert abs(logdet_t_derivative(tab, n, 1, P) - d1) < mpmath.mpf(10) ** -70 * max(1, abs(d1))
        assert abs(logdet_t_derivative(tab, n, 2, P) - d2) < mpmath.mpf(10) ** -70 * max(1, abs(d2))


def test_logdet_derivative_examples():
    t = mpmath.mpf("0.3")
    tab = gaussian_table(t, 2, P, 2)
    assert abs(logdet_t_derivative(tab, 1, 1, P) + 1 / mpmath.sqrt(t)) <= TOL
    assert abs(logdet_t_derivative(tab, 1, 2, P) - t ** -1.5 / 2) <= TOL * 10
    tab1 = gaussian_table(1, 2, P, 2)
    assert abs(logdet_t_derivative(tab1, 2, 1, P) - (-2 + mpmath.mpf(1) / 3)) <= TOL


@settings(max_examples=15, deadline=None)
@given(t=st.fractions(min_value=Fraction(1, 1000), max_value=100, max_denominator=1000),
       n_max=st.integers(2, 30))
def test_recurrence_invariants(t, n_max):
    prec = PrecisionConfig.for_order(n_max)
    rec = rec_at(t, n_max, 0, prec)
    tol = prec.tolerance
    with prec.workprec():
        assert all(h > 0 for h in rec.h)
        for n in range(1, n_max + 1):
            assert rec.beta[n] > 0
            assert abs(rec.beta[n] - rec.h[n] / rec.h[n - 1]) <= tol * rec.beta[n]
            assert abs(rec.beta[n] - (rec.p_coeff[n] - rec.p_coeff[n + 1])) <= tol * max(1, rec.beta[n])
            assert abs(mpmath.fsum(rec.beta[:n]) + rec.p_coeff[n]) <= tol * max(1, abs(rec.p_coeff[n]))
            s = mpmath.fsum(mpmath.log(h) for h in rec.h[:n])
            assert abs(rec.logD[n] - s) <= tol * max(1, abs(s))


@pytest.mark.parametrize("t", ["0.02", "1", "50"])
def test_split_matches_unsplit(t):
    prec = PrecisionConfig.for_order(20)
    a = rec_at(t, 20, 2, prec, split=True)
    b = rec_at(t, 20, 2, prec, split=False)
    tol = prec.tolerance
    for n in range(21):
        assert abs(a.h[n] - b.h[n]) <= tol * a.h[n]
        for j in range(2):
            x, y = a.log_h_derivs[j][n], b.log_h_derivs[j][n]
            assert abs(x - y) <= tol * max(1, abs(x))


def test_orthogonality_by_quadrature():
    t = "0.6"
    rec = rec_at(t, 10)
    polys = [polynomial_coeffs(rec, n) for n in range(11)]
    with mpmath.workdps(40):
        tt = mpmath.mpf(t)
        pk = tt ** 0.25
        w = lambda x: mpmath.exp(-x * x - tt / (x * x))
        hmax = max(rec.h)
        for n, m in [(0, 2), (3, 1), (4, 10), (7, 9), (9, 5)]:
            f = lambda x: polys[n].evaluate(x)[0] * polys[m].evaluate(x)[0] * w(x)
            val = 2 * mpmath.quad(f, [0, pk / 2, pk, 2 * pk, 8, mpmath.inf]) if (n + m) % 2 == 0 else 0
            assert abs(val) <= mpmath.mpf(10) ** -30 * hmax


def test_precision_failure_carries_index():
    # far too few bits for a large Hankel matrix at small t
    prec = PrecisionConfig(64, 8)
    with pytest.raises(PrecisionFailure) as info:
        rec_at("1e-3", 120, 0, prec)
    assert info.value.index is not None


def test_derivative_needs_positive_t():
    tab = build_moment_table(WeightSpec(Family.GAUSSIAN, 0), 0, 8, P)
    with pytest.raises(DomainError):
        logdet_t_derivative(tab, 2, 1, P)
