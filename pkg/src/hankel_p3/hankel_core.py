"""Norms, recurrence coefficients and log-determinants from moment matrices.

The squared norms ``h_n`` are the pivots of a symmetric triangular
factorization of the Hankel moment matrix. Exact t-derivatives of the
pivots come from running the same elimination on truncated Taylor series
of the moments (Taylor-mode differentiation of the factorization). This
is algebraically the trace identity

    d/dt ln det M = tr(M^-1 M'),
    d2/dt2 ln det M = tr(M^-1 M'') - tr((M^-1 M')^2),

applied to every leading principal block at once, and never uses finite
differences.

For the even Gaussian weight the matrix is permutation-similar to the
direct sum of two Hankel matrices in ``y = x^2`` with weights
``y^(-1/2) e^(-y - t/y)`` (even indices) and ``y^(1/2) e^(-y - t/y)`` (odd
indices). The default path factors those blocks separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
from mpmath import mp

from . import _jets
from .errors import DomainError, PrecisionFailure
from .moments import Family, MomentTable, WeightSpec, build_moment_table
from .precision import PrecisionConfig, to_mpf


@dataclass(frozen=True)
class RecurrenceData:
    """Recurrence data for ``0 <= n <= n_max`` at a single ``t``.

    Index conventions: ``h[n]`` and ``beta[n]`` for ``0 <= n <= n_max`` with
    ``beta[0] = 0``; ``p_coeff[n]`` and ``logD[n]`` for ``0 <= n <= n_max + 1``
    with ``p(0) = p(1) = 0`` and ``ln D_0 = 0``. ``log_h_derivs[j - 1][n]`` is
    the j-th t-derivative of ``ln h_n``.
    """

    t: mpmath.mpf
    n_max: int
    h: tuple
    beta: tuple
    p_coeff: tuple
    logD: tuple
    log_h_derivs: tuple = ()
    split: bool = True
    work_bits: int = 256

    @property
    def deriv_order(self) -> int:
        return len(self.log_h_derivs)

    def logD_derivative(self, order: int, n: int):
        """``d^order/dt^order ln D_n`` from the stored pivot derivatives."""
        if not 1 <= order <= self.deriv_order:
            raise DomainError(f"derivative order {order} not available (have {self.deriv_order})")
        with mp.workprec(self.work_bits):
            return mpmath.fsum(self.log_h_derivs[order - 1][:n])


@dataclass(frozen=True)
class PolynomialCoeffs:
    """Monic ``P_n`` with ``coeffs[k]`` the coefficient of ``x**k``."""

    n: int
    coeffs: tuple

    def evaluate(self, z, derivatives: int = 0):
        """Return ``[P(z), P'(z), ...]`` up to the requested derivative order (Horner)."""
        vals = [mpmath.mpf(0)] * (derivatives + 1)
        for c in reversed(self.coeffs):
            for d in range(derivatives, 0, -1):
                vals[d] = vals[d] * z + d * vals[d - 1]
            vals[0] = vals[0] * z + c
        return vals


def _hankel_pivot_jets(seq, size, order):
    """Pivots (as jets) of the Hankel matrix ``M[i][j] = seq[i + j]`` of the given size."""
    J = order
    A = [np.empty((size, size), dtype=object) for _ in range(J + 1)]
    for i in range(size):
        for j in range(size):
            jet = seq[i + j]
            for c in range(J + 1):
                A[c][i, j] = jet[c]
    pivots = []
    for k in range(size):
        d = [A[c][k, k] for c in range(J + 1)]
        if not d[0] > 0:
            raise PrecisionFailure(k)
        pivots.append(d)
        if k == size - 1:
            break
        dinv = _jets.inv(d)
        col = [A[c][k + 1:, k] for c in range(J + 1)]
        row = [A[c][k, k + 1:] for c in range(J + 1)]
        ell = []
        for c in range(J + 1):
            acc = col[0] * dinv[c]
            for a in range(1, c + 1):
                acc = acc + col[a] * dinv[c - a]
            ell.append(acc)
        for c in range(J + 1):
            upd = np.multiply.outer(ell[0], row[c])
            for a in range(1, c + 1):
                upd = upd + np.multiply.outer(ell[a], row[c - a])
            A[c][k + 1:, k + 1:] -= upd
    return pivots


def _check_order(table: MomentTable, order: int):
    if order > table.max_taylor_order():
        raise DomainError(
            f"derivative order {order} needs moments down to index {-order * table.spec.shift}; "
            f"table starts at {table.k_min}")


def pivot_jets(table: MomentTable, size: int, order: int = 0, split: bool = True):
    """Pivot jets ``h_0 .. h_{size-1}`` of the moment matrix described by ``table``."""
    if size < 1:
        return []
    _check_order(table, order)
    top = 2 * size - 2
    if not table.covers(0, top):
        raise DomainError(f"table must cover moment indices 0..{top}")
    with mp.workprec(table.work_bits):
        if table.spec.family is Family.LAGUERRE:
            return _hankel_pivot_jets([table.taylor(k, order) for k in range(top + 1)], size, order)
        if not split:
            return _hankel_pivot_jets([table.taylor(k, order) for k in range(top + 1)], size, order)
        n_even, n_odd = (size + 1) // 2, size // 2
        try:
            even = _hankel_pivot_jets([table.taylor(2 * k, order) for k in range(2 * n_even - 1)],
                                      n_even, order)
        except PrecisionFailure as exc:
            raise PrecisionFailure(2 * exc.index) from None
        odd = []
        if n_odd:
            try:
                odd = _hankel_pivot_jets([table.taylor(2 * k + 2, order) for k in range(2 * n_odd - 1)],
                                         n_odd, order)
            except PrecisionFailure as exc:
                raise PrecisionFailure(2 * exc.index + 1) from None
        return [even[k // 2] if k % 2 == 0 else odd[k // 2] for k in range(size)]


def compute_recurrence(table: MomentTable, n_max: int, prec: PrecisionConfig | None = None,
                       deriv_order: int | None = None, split: bool = True) -> RecurrenceData:
    """Squared norms, recurrence coefficients and log-determinants up to ``n_max``.

    Parameters
    ----------
    table : MomentTable
        Must cover indices ``0 .. 2 n_max``; t-derivatives of order ``j`` also
        need indices down to ``-j * shift``.
    n_max : int
        Largest polynomial degree (``h_0 .. h_{n_max}``).
    prec : PrecisionConfig, optional
        Defaults to the table's working precision.
    deriv_order : int, optional
        Number of t-derivatives of ``ln h_n`` to carry (0..3). Defaults to the
        largest order the table supports, capped at 3.
    split : bool
        Factor the even/odd sublattices separately (Gaussian family only).

    Raises
    ------
    PrecisionFailure
        When a pivot is not strictly positive; ``index`` is the degree where
        positivity broke.
    """
    prec = prec or PrecisionConfig(table.work_bits, min(64, table.work_bits - 1))
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    if deriv_order is None:
        deriv_order = min(3, table.max_taylor_order())
    piv = pivot_jets(table, n_max + 1, deriv_order, split)
    with prec.workprec():
        t = to_mpf(table.spec.t)
        logs = [_jets.log_derivatives(p) for p in piv]
        h = tuple(p[0] for p in piv)
        beta = (mpmath.mpf(0),) + tuple(h[n] / h[n - 1] for n in range(1, n_max + 1))
        pc = [mpmath.mpf(0), mpmath.mpf(0)]
        for n in range(1, n_max + 1):
            pc.append(pc[n] - beta[n])
        logD = [mpmath.mpf(0)]
        for n in range(n_max + 1):
            logD.append(logD[-1] + logs[n][0])
        derivs = tuple(tuple(lg[j] for lg in logs) for j in range(1, deriv_order + 1))
    return RecurrenceData(t, n_max, h, beta, tuple(pc[: n_max + 2]), tuple(logD), derivs, split, prec.work_bits)


def hankel_determinant(table: MomentTable, n: int, prec: PrecisionConfig | None = None):
    """``ln D_n`` from the product of pivots."""
    if n < 1:
        raise DomainError("n must be >= 1")
    prec = prec or PrecisionConfig(table.work_bits, min(64, table.work_bits - 1))
    piv = pivot_jets(table, n, 0)
    with prec.workprec():
        return mpmath.fsum(mpmath.log(p[0]) for p in piv)


def polynomial_coeffs(rec: RecurrenceData, n: int) -> PolynomialCoeffs:
    """Monic ``P_n`` from ``x P_k = P_{k+1} + beta_k P_{k-1}``, starting at ``P_0 = 1``."""
    if not 0 <= n <= rec.n_max + 1:
        raise DomainError(f"degree {n} outside 0..{rec.n_max + 1}")
    with mp.workprec(rec.work_bits):
        prev, cur = [], [mpmath.mpf(1)]
        for k in range(n):
            nxt = [mpmath.mpf(0)] + cur
            for i, c in enumerate(prev):
                nxt[i] -= rec.beta[k] * c
            prev, cur = cur, nxt
        # zero pattern is exact by parity; clean accumulated signed zeros
        cur = [c if (n - i) % 2 == 0 else mpmath.mpf(0) for i, c in enumerate(cur)]
    return PolynomialCoeffs(n, tuple(cur))


def logdet_t_derivative(table: MomentTable, n: int, order: int, prec: PrecisionConfig | None = None):
    """``d^order/dt^order ln D_n(t)`` for order 1 or 2 via the differentiated factorization."""
    if order not in (1, 2, 3):
        raise DomainError(f"order must be 1, 2 or 3, got {order}")
    if table.spec.unperturbed:
        raise DomainError("t-derivatives require t > 0")
    prec = prec or PrecisionConfig(table.work_bits, min(64, table.work_bits - 1))
    piv = pivot_jets(table, n, order)
    with prec.workprec():
        return mpmath.fsum(_jets.log_derivatives(p)[order] for p in piv)


def gaussian_table(t, n_max: int, prec: PrecisionConfig, deriv_order: int = 3) -> MomentTable:
    """Moment table sufficient for ``compute_recurrence(.., n_max, deriv_order)``."""
    spec = WeightSpec(Family.GAUSSIAN, t)
    lo = 0 if spec.unperturbed else -2 * deriv_order
    return build_moment_table(spec, lo, 2 * n_max, prec)


def laguerre_table(t, alpha, n_max: int, prec: PrecisionConfig, deriv_order: int = 3) -> MomentTable:
    spec = WeightSpec(Family.LAGUERRE, t, alpha)
    lo = 0 if spec.unperturbed else -deriv_order
    return build_moment_table(spec, lo, 2 * n_max, prec)


def hermite_logD0(n: int, prec: PrecisionConfig | None = None):
    """``ln D_n(0) = sum_{j<n} ln(sqrt(pi) j! / 2^j)`` for the plain Gaussian weight."""
    prec = prec or PrecisionConfig()
    with prec.workprec():
        return mpmath.fsum(mpmath.log(mpmath.pi) / 2 + mpmath.loggamma(j + 1) - j * mpmath.log(2)
                           for j in range(n))


def laguerre_logD0(n: int, alpha, prec: PrecisionConfig | None = None):
    """``ln D~_n(0, alpha) = sum_{k<n} ln(k! Gamma(k + alpha + 1))``."""
    prec = prec or PrecisionConfig()
    with prec.workprec():
        a = to_mpf(alpha)
        return mpmath.fsum(mpmath.loggamma(k + 1) + mpmath.loggamma(k + a + 1) for k in range(n))
