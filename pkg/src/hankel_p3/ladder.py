"""Auxiliary ladder quantities R_n, r_n, sigma_n and the algebraic identities they obey.

For ``w = exp(-v)`` with ``v(z) = z^2 + t/z^2`` the ladder coefficients are

    A_n(z) = 2 + R_n / z^2,     B_n(z) = r_n / z + (1 - (-1)^n) t / z^3.

``R_n`` is taken from the t-derivative of the norms (``R_n = -2t d/dt ln h_n``),
``r_n = 2 beta_n - n`` and ``sigma_n = 2t d/dt ln D_n``; the defining integrals
of ``R_n`` and ``r_n`` serve only as test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp

from .errors import DomainError
from .hankel_core import (RecurrenceData, compute_recurrence, gaussian_table,
                          polynomial_coeffs)
from .moments import MomentTable
from .precision import PrecisionConfig
from .report import ResidualReport, scaled_residual

DEFAULT_Z_SAMPLES = ("-2", "-1", "-1/2", "1/2", "1", "2")


def _sign(n):
    return 1 if n % 2 == 0 else -1


def _parity(n):
    """``1 - (-1)^n``."""
    return n % 2 * 2


@dataclass(frozen=True)
class AuxQuantities:
    """R_n, r_n (0 <= n <= n_max), sigma_n (0 <= n <= n_max + 1) and their t-derivatives.

    Second derivatives are present only when the recurrence data carried
    third derivatives of ``ln h_n``.
    """

    t: mpmath.mpf
    n_max: int
    R: tuple
    r: tuple
    sigma: tuple
    dR: tuple
    dr: tuple
    dsigma: tuple
    beta: tuple
    p: tuple
    d2R: tuple | None = None
    d2r: tuple | None = None
    d2sigma: tuple | None = None
    work_bits: int = 256

    @property
    def has_second_derivatives(self) -> bool:
        return self.d2R is not None


@dataclass(frozen=True)
class LadderCoefficients:
    n: int
    R_n: mpmath.mpf
    r_n: mpmath.mpf
    parity_term: mpmath.mpf

    def A(self, z):
        return 2 + self.R_n / z ** 2

    def B(self, z):
        return self.r_n / z + self.parity_term / z ** 3

    def dA(self, z):
        return -2 * self.R_n / z ** 3

    def dB(self, z):
        return -self.r_n / z ** 2 - 3 * self.parity_term / z ** 4


def compute_aux(rec: RecurrenceData, table: MomentTable | None = None,
                prec: PrecisionConfig | None = None) -> AuxQuantities:
    """Derive R_n, r_n, sigma_n and their exact t-derivatives from recurrence data.

    If ``rec`` carries fewer than two t-derivatives of ``ln h_n`` the
    factorization is redone from ``table``.
    """
    prec = prec or PrecisionConfig(rec.work_bits, min(64, rec.work_bits - 1))
    if rec.deriv_order < 2:
        if table is None:
            raise DomainError("recurrence data lacks t-derivatives and no moment table was given")
        rec = compute_recurrence(table, rec.n_max, prec, deriv_order=min(3, table.max_taylor_order()))
        if rec.deriv_order < 2:
            raise DomainError("moment table does not support second t-derivatives")
    t, N = rec.t, rec.n_max
    L1, L2 = rec.log_h_derivs[0], rec.log_h_derivs[1]
    L3 = rec.log_h_derivs[2] if rec.deriv_order >= 3 else None
    with prec.workprec():
        R = [-2 * t * L1[n] for n in range(N + 1)]
        dR = [-2 * L1[n] - 2 * t * L2[n] for n in range(N + 1)]
        d2R = [-4 * L2[n] - 2 * t * L3[n] for n in range(N + 1)] if L3 else None
        r, dr, d2r = [mpmath.mpf(0)], [mpmath.mpf(0)], [mpmath.mpf(0)]
        for n in range(1, N + 1):
            b = rec.beta[n]
            b1 = L1[n] - L1[n - 1]
            b2 = L2[n] - L2[n - 1]
            r.append(2 * b - n)
            dr.append(2 * b * b1)
            d2r.append(2 * b * (b1 ** 2 + b2))
        sigma, dsigma, d2sigma = [mpmath.mpf(0)], [mpmath.mpf(0)], [mpmath.mpf(0)]
        for n in range(N + 1):
            sigma.append(sigma[-1] - R[n])
            dsigma.append(dsigma[-1] - dR[n])
            if d2R:
                d2sigma.append(d2sigma[-1] - d2R[n])
    return AuxQuantities(t, N, tuple(R), tuple(r), tuple(sigma), tuple(dR), tuple(dr), tuple(dsigma),
                         rec.beta, rec.p_coeff,
                         tuple(d2R) if d2R else None, tuple(d2r) if d2R else None,
                         tuple(d2sigma) if d2R else None, prec.work_bits)


def gaussian_aux(t, n_max: int, prec: PrecisionConfig | None = None, deriv_order: int = 3):
    """Moments, recurrence data and auxiliary quantities for the Gaussian weight at ``t``.

    ``deriv_order`` is raised to 2, the least that the auxiliary quantities need.
    """
    prec = prec or PrecisionConfig.for_order(n_max)
    deriv_order = max(2, deriv_order)
    table = gaussian_table(t, n_max, prec, deriv_order)
    rec = compute_recurrence(table, n_max, prec, deriv_order)
    return table, rec, compute_aux(rec, table, prec)


def ladder_coefficients(aux: AuxQuantities, n: int) -> LadderCoefficients:
    with mp.workprec(aux.work_bits):
        return LadderCoefficients(n, aux.R[n], aux.r[n], _parity(n) * aux.t)


def _z_values(z_samples):
    from .precision import to_mpf
    zs = [to_mpf(z) for z in z_samples]
    if any(z == 0 for z in zs):
        raise DomainError("z samples must avoid 0")
    return zs


def check_S_identities(aux: AuxQuantities, rec: RecurrenceData | None = None,
                       prec: PrecisionConfig | None = None, z_samples=DEFAULT_Z_SAMPLES):
    """Residuals of the compatibility conditions and the coefficient identities.

    Returns a dict mapping identity name to a :class:`ResidualReport` over
    ``1 <= n <= n_max - 1``. Compatibility conditions are sampled at
    ``z_samples`` and the worst sample is kept.
    """
    if aux.n_max < 2:
        raise DomainError("need n_max >= 2")
    prec = prec or PrecisionConfig(aux.work_bits, min(64, aux.work_bits - 1))
    beta = rec.beta if rec is not None else aux.beta
    p = rec.p_coeff if rec is not None else aux.p
    names = ("compatibility_1", "compatibility_2", "sum_rule", "R_equals_r_sum", "r_product",
             "R_partial_sum", "p_from_partial_sums", "p_rational")
    out = {name: {} for name in names}
    t, R, r, sigma = aux.t, aux.R, aux.r, aux.sigma
    with prec.workprec():
        zs = _z_values(z_samples)
        for n in range(1, aux.n_max):
            s, par = _sign(n), _parity(n)
            sumR = -sigma[n]
            out["R_equals_r_sum"][n] = scaled_residual(R[n], r[n + 1] + r[n],
                                                       abs(R[n]) + abs(r[n + 1]) + abs(r[n]))
            lhs = -2 * s * t * r[n]
            rhs = beta[n] * R[n] * R[n - 1]
            out["r_product"][n] = scaled_residual(lhs, rhs, abs(lhs) + abs(rhs))
            lhs = r[n] ** 2 + 2 * par * t + sumR
            rhs = 2 * beta[n] * (R[n - 1] + R[n])
            out["R_partial_sum"][n] = scaled_residual(lhs, rhs, abs(lhs) + abs(rhs))
            lhs = 4 * p[n]
            rhs = r[n] - sumR - n * (n - 1)
            out["p_from_partial_sums"][n] = scaled_residual(lhs, rhs, abs(lhs) + abs(r[n]) + sumR + n * (n - 1))
            terms = (r[n], r[n] ** 2, 2 * par * t, 4 * s * t * r[n] / R[n], -(n + r[n]) * R[n], -n * (n - 1))
            out["p_rational"][n] = scaled_residual(lhs, mpmath.fsum(terms),
                                                   abs(lhs) + mpmath.fsum(abs(x) for x in terms))
            c_prev, c_n, c_next = (ladder_coefficients(aux, m) for m in (n - 1, n, n + 1))
            w1 = w2 = w3 = mpmath.mpf(0)
            for z in zs:
                vp = 2 * z - 2 * t / z ** 3
                Bn, Bn1, An = c_n.B(z), c_next.B(z), c_n.A(z)
                w1 = max(w1, scaled_residual(Bn1 + Bn, z * An - vp,
                                             abs(Bn1) + abs(Bn) + abs(z * An) + abs(vp)))
                lhs = 1 + z * (Bn1 - Bn)
                a1, a2 = beta[n + 1] * c_next.A(z), beta[n] * c_prev.A(z)
                w2 = max(w2, scaled_residual(lhs, a1 - a2, 1 + abs(z) * (abs(Bn1) + abs(Bn)) + abs(a1) + abs(a2)))
                sumA = 2 * n - sigma[n] / z ** 2
                lhs = Bn ** 2 + vp * Bn + sumA
                rhs = beta[n] * An * c_prev.A(z)
                w3 = max(w3, scaled_residual(lhs, rhs, Bn ** 2 + abs(vp * Bn) + 2 * n + abs(sigma[n] / z ** 2)
                                             + abs(rhs)))
            out["compatibility_1"][n] = w1
            out["compatibility_2"][n] = w2
            out["sum_rule"][n] = w3
    return {name: ResidualReport(name, t, res) for name, res in out.items()}


def check_ladder_relations(rec: RecurrenceData, aux: AuxQuantities, z_samples=DEFAULT_Z_SAMPLES,
                           prec: PrecisionConfig | None = None, n_range=None):
    """Residuals of the lowering and raising relations and of the second-order ODE for P_n.

    Polynomials are evaluated from their monic coefficients at every sample
    ``z``; residuals are scaled by the local magnitude of the terms.
    """
    prec = prec or PrecisionConfig(aux.work_bits, min(64, aux.work_bits - 1))
    n_range = n_range if n_range is not None else range(1, rec.n_max)
    out = {"lowering": {}, "raising": {}, "polynomial_ode": {}}
    t, beta = aux.t, rec.beta
    with prec.workprec():
        zs = _z_values(z_samples)
        polys = {}
        for n in n_range:
            if not 1 <= n <= rec.n_max - 1:
                raise DomainError(f"n={n} outside 1..n_max-1")
            for m in (n - 1, n):
                if m not in polys:
                    polys[m] = polynomial_coeffs(rec, m)
            cn, cp = ladder_coefficients(aux, n), ladder_coefficients(aux, n - 1)
            wl = wr = wo = mpmath.mpf(0)
            for z in zs:
                P, dP, d2P = polys[n].evaluate(z, 2)
                Q, dQ = polys[n - 1].evaluate(z, 1)
                vp = 2 * z - 2 * t / z ** 3
                An, Bn, Ap = cn.A(z), cn.B(z), cp.A(z)
                a, b = beta[n] * An * Q, Bn * P
                wl = max(wl, scaled_residual(dP, a - b, abs(dP) + abs(a) + abs(b)))
                a, b = (Bn + vp) * Q, Ap * P
                wr = max(wr, scaled_residual(dQ, a - b, abs(dQ) + abs(a) + abs(b)))
                ratio = cn.dA(z) / An
                sumA = 2 * n - aux.sigma[n] / z ** 2
                terms = (d2P, -(vp + ratio) * dP, (cn.dB(z) - Bn * ratio + sumA) * P)
                wo = max(wo, scaled_residual(mpmath.fsum(terms), 0, mpmath.fsum(abs(x) for x in terms)))
            out["lowering"][n], out["raising"][n], out["polynomial_ode"][n] = wl, wr, wo
    return {name: ResidualReport(name, t, res) for name, res in out.items()}
