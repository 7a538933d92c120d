"""Laguerre correspondence and double-scaling measurements.

The even Gaussian weight is tied to the Laguerre weights ``y^(+-1/2) e^(-y-t/y)``
by the parity split. Here the Gaussian side is computed from the full
(unsplit) moment matrix, so the correspondence checks compare two
independent factorizations.

Scaled samples use ``t = s / (2n + 1)``; series values come from
:mod:`hankel_p3.series`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError
from .hankel_core import (compute_recurrence, gaussian_table, hermite_logD0,
                          laguerre_table)
from .precision import PrecisionConfig, to_mpf
from .report import ResidualReport, scaled_residual
from .series import Regime, eval_best, eval_series, get_series

HALF = mpmath.mpf(1) / 2


class ScaledQuantity(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    SIGMA = "sigma"
    SIGMA2 = "sigma2"
    DELTA = "Delta"
    DELTA2 = "Delta2"


SERIES_FOR = {ScaledQuantity.C1: "C1", ScaledQuantity.C2: "C2", ScaledQuantity.SIGMA: "sigma1",
              ScaledQuantity.SIGMA2: "sigma2", ScaledQuantity.DELTA: "Delta1", ScaledQuantity.DELTA2: "Delta2"}


def _laguerre_rec(t, alpha, n_max, prec, order):
    table = laguerre_table(t, alpha, n_max, prec, order)
    return compute_recurrence(table, n_max, prec, order)


def laguerre_correspondence_check(t, n: int, prec: PrecisionConfig | None = None):
    """Residuals of the Gaussian/Laguerre correspondence for ``0 <= m <= n``.

    Reports ``det_even`` (``D_2m = D~_m(1/2) D~_m(-1/2)``), ``det_odd``
    (``D_2m+1 = D~_m(1/2) D~_m+1(-1/2)``), ``sigma_even``, ``sigma_odd``
    (sigma against ``2 [H(1/2) + H(-1/2)]``), ``R_even`` (``R_2m = 2 a_m(-1/2)``)
    and ``R_odd`` (``R_2m+1 = 2 a_m(1/2)``). Determinants are compared on the
    log scale.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    prec = prec or PrecisionConfig.for_order(2 * n + 1)
    gtab = gaussian_table(t, 2 * n + 1, prec, 1)
    g = compute_recurrence(gtab, 2 * n + 1, prec, 1, split=False)
    lp = _laguerre_rec(t, HALF, n, prec, 1)
    lm = _laguerre_rec(t, -HALF, n, prec, 1)
    out = {k: {} for k in ("det_even", "det_odd", "sigma_even", "sigma_odd", "R_even", "R_odd")}
    with prec.workprec():
        tt = g.t

        def sig(rec, m):
            return 2 * tt * mpmath.fsum(rec.log_h_derivs[0][:m])

        def H(rec, m):
            return tt * mpmath.fsum(rec.log_h_derivs[0][:m])

        def a(rec, m):
            return -tt * rec.log_h_derivs[0][m]

        for m in range(n + 1):
            lhs, rhs = g.logD[2 * m], lp.logD[m] + lm.logD[m]
            out["det_even"][m] = scaled_residual(lhs, rhs, abs(lhs) + abs(lp.logD[m]) + abs(lm.logD[m]))
            lhs, rhs = g.logD[2 * m + 1], lp.logD[m] + lm.logD[m + 1]
            out["det_odd"][m] = scaled_residual(lhs, rhs, abs(lhs) + abs(lp.logD[m]) + abs(lm.logD[m + 1]))
            lhs, rhs = sig(g, 2 * m), 2 * (H(lp, m) + H(lm, m))
            out["sigma_even"][m] = scaled_residual(lhs, rhs, abs(lhs) + abs(rhs))
            lhs, rhs = sig(g, 2 * m + 1), 2 * (H(lp, m) + H(lm, m + 1))
            out["sigma_odd"][m] = scaled_residual(lhs, rhs, abs(lhs) + abs(rhs))
            R_even, R_odd = -2 * tt * g.log_h_derivs[0][2 * m], -2 * tt * g.log_h_derivs[0][2 * m + 1]
            out["R_even"][m] = scaled_residual(R_even, 2 * a(lm, m), abs(R_even))
            out["R_odd"][m] = scaled_residual(R_odd, 2 * a(lp, m), abs(R_odd))
    return {k: ResidualReport(k, g.t, v) for k, v in out.items()}


@dataclass(frozen=True)
class HData:
    """``H_m = t d/dt ln D~_m`` and its first two t-derivatives for ``0 <= m <= n``."""

    t: mpmath.mpf
    alpha: object
    H: tuple
    dH: tuple
    d2H: tuple


def laguerre_H(t, alpha, n: int, prec: PrecisionConfig | None = None) -> HData:
    prec = prec or PrecisionConfig.for_order(2 * n + 1)
    rec = _laguerre_rec(t, alpha, max(n - 1, 0), prec, 3)
    L1, L2, L3 = rec.log_h_derivs
    with prec.workprec():
        tt = rec.t
        H, dH, d2H = [], [], []
        for m in range(n + 1):
            s1, s2, s3 = mpmath.fsum(L1[:m]), mpmath.fsum(L2[:m]), mpmath.fsum(L3[:m])
            H.append(tt * s1)
            dH.append(s1 + tt * s2)
            d2H.append(2 * s2 + tt * s3)
    return HData(tt, alpha, tuple(H), tuple(dH), tuple(d2H))


def H_equation_residual(n: int, alpha, t_grid, prec: PrecisionConfig | None = None):
    """Residual of the second-order equation for ``H_m(t, alpha)``, ``0 <= m <= n``, at each t.

    ``(t H'')^2 = [m - (2m + alpha) H']^2 - 4 [m(m + alpha) + t H' - H] H' (H' - 1)``.

    Returns
    -------
    dict
        ``t -> ResidualReport`` keyed by m.
    """
    prec = prec or PrecisionConfig.for_order(2 * n + 1)
    out = {}
    for t in t_grid:
        d = laguerre_H(t, alpha, n, prec)
        res = {}
        with prec.workprec():
            a = to_mpf(alpha)
            for m in range(n + 1):
                H, h1, h2 = d.H[m], d.dH[m], d.d2H[m]
                lhs = (d.t * h2) ** 2
                b1 = m - (2 * m + a) * h1
                br = (m * (m + a), d.t * h1, -H)
                rhs = b1 ** 2 - 4 * mpmath.fsum(br) * h1 * (h1 - 1)
                scale = lhs + (m + abs((2 * m + a) * h1)) ** 2 + 4 * mpmath.fsum(abs(x) for x in br) * abs(h1 * (h1 - 1))
                res[m] = scaled_residual(lhs, rhs, scale)
        out[d.t] = ResidualReport("H_equation", d.t, res)
    return out


@dataclass(frozen=True)
class ScalingSample:
    n: int
    s: mpmath.mpf
    t: mpmath.mpf
    value: mpmath.mpf
    quantity: ScaledQuantity


def scaled_measurement(quantity, n: int, s, prec: PrecisionConfig | None = None) -> ScalingSample:
    """Finite-n value of a double-scaled quantity at ``t = s / (2n + 1)``.

    ``C1``: ``R_2n(t) / t``; ``C2``: ``R_2n+1(t) / t``; ``sigma``: ``sigma_2n(t)``;
    ``sigma2``: ``sigma_2n+1(t)``; ``Delta``/``Delta2``: ``ln D_2n(t) - ln D_2n(0)``
    (resp. ``2n+1``), reported on the log scale.
    """
    q = ScaledQuantity(quantity)
    if n < 1:
        raise DomainError("n must be >= 1")
    odd = q in (ScaledQuantity.C2, ScaledQuantity.SIGMA2, ScaledQuantity.DELTA2)
    N = 2 * n + 1 if odd else 2 * n
    prec = prec or PrecisionConfig.for_order(N + 1)
    with prec.workprec():
        ss = to_mpf(s)
        if not ss > 0:
            raise DomainError("s must be positive")
        t = ss / (2 * n + 1)
    if q in (ScaledQuantity.DELTA, ScaledQuantity.DELTA2):
        rec = compute_recurrence(gaussian_table(t, N - 1, prec, 0), N - 1, prec, 0)
        with prec.workprec():
            value = rec.logD[N] - hermite_logD0(N, prec)
    else:
        rec = compute_recurrence(gaussian_table(t, N, prec, 1), N, prec, 1)
        with prec.workprec():
            if q in (ScaledQuantity.C1, ScaledQuantity.C2):
                value = -2 * rec.log_h_derivs[0][N]
            else:
                value = 2 * t * mpmath.fsum(rec.log_h_derivs[0][:N])
    return ScalingSample(n, ss, t, value, q)


@dataclass(frozen=True)
class ConvergenceReport:
    """Finite-n samples against the series limit.

    ``rate`` and ``constant`` fit ``deviation ~ constant * n^(-rate)``; both are
    None when every deviation is already below ``tolerance`` (status
    ``"converged to tolerance"``).
    """

    quantity: ScaledQuantity
    s: mpmath.mpf
    regime: Regime
    series_value: mpmath.mpf
    next_term_bound: mpmath.mpf
    samples: tuple
    deviations: tuple
    rate: float | None
    constant: float | None
    status: str

    @property
    def monotone(self) -> bool:
        d = self.deviations
        return all(d[i + 1] < d[i] for i in range(len(d) - 1))

    def rows(self):
        """``(quantity, regime, n, s, t, sample, series, next_term_bound, deviation)`` per n."""
        return [(self.quantity.value, self.regime.value, smp.n, smp.s, smp.t, smp.value, self.series_value,
                 self.next_term_bound, dev) for smp, dev in zip(self.samples, self.deviations)]


def fit_power_law(n_list, deviations):
    """Least-squares fit of ``log dev = log C - p log n``; returns ``(p, C)``."""
    x = np.log(np.array([float(n) for n in n_list]))
    y = np.log(np.array([float(d) for d in deviations]))
    slope, intercept = np.polyfit(x, y, 1)
    return float(-slope), float(np.exp(intercept))


def convergence_report(quantity, s, n_list, prec: PrecisionConfig | None = None, regime="best",
                       truncation="auto", tolerance=None) -> ConvergenceReport:
    """Measure samples at each n and compare with the optimally truncated series."""
    q = ScaledQuantity(quantity)
    n_list = list(n_list)
    if len(n_list) < 3 or n_list != sorted(n_list):
        raise DomainError("n_list must be ascending with at least 3 entries")
    name = SERIES_FOR[q]
    sprec = PrecisionConfig(256, 64)
    if regime == "best":
        sv = eval_best(name, s, sprec)
    else:
        sv = eval_series(get_series(name, regime), s, truncation, sprec)
    samples = [scaled_measurement(q, n, s, prec) for n in n_list]
    with mpmath.workprec(256):
        devs = tuple(abs(smp.value - sv.value) for smp in samples)
        tol = to_mpf(tolerance) if tolerance is not None else mpmath.mpf(10) ** -30
    if all(d <= tol for d in devs):
        return ConvergenceReport(q, samples[0].s, sv.regime, sv.value, sv.next_term_bound, tuple(samples), devs,
                                 None, None, "converged to tolerance")
    p, C = fit_power_law(n_list, [max(d, tol) for d in devs])
    return ConvergenceReport(q, samples[0].s, sv.regime, sv.value, sv.next_term_bound, tuple(samples), devs,
                             p, C, "fitted")


def parity_gap(quantity, n: int, s, prec: PrecisionConfig | None = None):
    """Difference between the odd and even subsequences (e.g. ``sigma_2n+1 - sigma_2n``) at the same s."""
    pairs = {"sigma": ("sigma", "sigma2"), "Delta": ("Delta", "Delta2"), "C": ("C1", "C2")}
    even, odd = pairs[quantity]
    a = scaled_measurement(even, n, s, prec)
    b = scaled_measurement(odd, n, s, prec)
    with mpmath.workprec(256):
        return b.value - a.value
