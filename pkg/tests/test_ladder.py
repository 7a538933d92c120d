from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hankel_p3.errors import DomainError
from hankel_p3.hankel_core import compute_recurrence, gaussian_table
from hankel_p3.ladder import (check_ladder_relations, check_S_identities, compute_aux, gaussian_aux,
                              ladder_coefficients)
from hankel_p3.precision import PrecisionConfig, to_mpf

P = PrecisionConfig(256, 64)


def closed(t):
    st_ = mpmath.sqrt(to_mpf(t))
    return {"r1": 2 * st_, "R0": 2 * st_, "R1": 4 * st_ ** 2 / (2 * st_ + 1), "sigma1": -2 * st_}


@pytest.mark.parametrize("t", ["0.001", "0.3", "1", "42"])
def test_closed_form_examples(t):
    _, _, aux = gaussian_aux(t, 4, P, 2)
    c = closed(t)
    tol = P.tolerance
    assert abs(aux.r[1] - c["r1"]) <= tol
    assert abs(aux.R[0] - c["R0"]) <= tol * max(1, c["R0"])
    assert abs(aux.R[1] - c["R1"]) <= tol * max(1, c["R1"])
    assert abs(aux.sigma[1] - c["sigma1"]) <= tol * max(1, abs(c["sigma1"]))
    assert aux.r[0] == 0 and aux.sigma[0] == 0


def test_r2_at_t1():
    _, _, aux = gaussian_aux(1, 4, P, 2)
    assert abs(aux.r[2] + mpmath.mpf(2) / 3) <= P.tolerance


def test_recomputes_when_derivatives_missing():
    rec = compute_recurrence(gaussian_table("0.5", 5, P, 0), 5, P, 0)
    with pytest.raises(DomainError):
        compute_aux(rec, None, P)
    aux = compute_aux(rec, gaussian_table("0.5", 5, P, 2), P)
    _, _, ref = gaussian_aux("0.5", 5, P, 2)
    assert all(abs(a - b) <= P.tolerance * max(1, abs(b)) for a, b in zip(aux.dR, ref.dR))


def test_S_identity_examples_n1():
    _, rec, aux = gaussian_aux(1, 3, P, 2)
    rep = check_S_identities(aux, rec, P)
    for name in ("R_equals_r_sum", "r_product", "sum_rule", "p_from_partial_sums", "p_rational",
                 "compatibility_1", "compatibility_2", "R_partial_sum"):
        assert rep[name].residuals[1] <= P.tolerance, name
    # hand values at t=1: -2(-1) t r_1 = 4 = beta_1 R_1 R_0
    assert abs(rec.beta[1] * aux.R[1] * aux.R[0] - 4) <= P.tolerance


@pytest.mark.parametrize("t", ["0.1", "1", "10"])
def test_S_identities_to_60(t):
    prec = PrecisionConfig.for_order(61)
    _, rec, aux = gaussian_aux(t, 61, prec, 2)
    for rep in check_S_identities(aux, rec, prec).values():
        assert rep.within(prec.tolerance), (rep.name, rep.worst_index, rep.worst)
        assert set(rep.residuals) == set(range(1, 61))


def test_ladder_relation_examples():
    _, rec, aux = gaussian_aux(1, 4, P, 2)
    lc = ladder_coefficients(aux, 1)
    z = mpmath.mpf(2)
    # P_1' = 1 = beta_1 A_1(2) P_0 - B_1(2) P_1(2)
    assert abs(rec.beta[1] * lc.A(z) - lc.B(z) * 2 - 1) <= P.tolerance
    assert abs(lc.parity_term - 2) <= P.tolerance
    assert ladder_coefficients(aux, 0).B(z) == 0
    rep = check_ladder_relations(rec, aux, prec=P)
    for r in rep.values():
        assert r.within(P.tolerance)


def test_ladder_relation_rejects_zero_sample():
    _, rec, aux = gaussian_aux(1, 4, P, 2)
    with pytest.raises(DomainError):
        check_ladder_relations(rec, aux, z_samples=("0", "1"), prec=P)


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_defining_integral_oracle(n):
    t = "0.7"
    _, _, aux = gaussian_aux(t, 7, P, 2)
    R, r = oracles.defining_integrals(n, t, 40)
    with mpmath.workdps(40):
        assert abs(aux.R[n] - R) <= mpmath.mpf(10) ** -30 * max(1, abs(R))
        assert abs(aux.r[n] - r) <= mpmath.mpf(10) ** -30 * max(1, abs(r))


@settings(max_examples=20, deadline=None)
@given(logt=st.floats(min_value=-3, max_value=2), n_max=st.integers(3, 60))
def test_sign_pattern_and_monotone_sigma(logt, n_max):
    t = Fraction(10) ** Fraction(round(logt * 8), 8) if logt >= 0 else Fraction(1, 10 ** 3) * Fraction(
        round((logt + 3) * 100) + 1)
    prec = PrecisionConfig.for_order(n_max)
    _, _, aux = gaussian_aux(t, n_max, prec, 1)
    for n in range(n_max + 1):
        assert aux.R[n] > 0
        assert aux.sigma[n + 1] < aux.sigma[n]
        if n >= 1:
            assert (-1) ** n * aux.r[n] <= 0
