"""Nonlinear difference equations in n for r_n, R_n and sigma_n.

The checks evaluate each equation on Hankel-derived data. ``run_recursion``
iterates the equations forward from initial data built from moment ratios;
every step is linear in the new unknown, so no root selection is involved.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import mpmath
from mpmath import mp

from .errors import DegeneracyError, DomainError
from .ladder import AuxQuantities, _parity, _sign
from .moments import Family, WeightSpec, build_moment_table
from .precision import PrecisionConfig, to_mpf
from .report import ResidualReport, scaled_residual

log = logging.getLogger(__name__)


class Quantity(str, enum.Enum):
    r = "r"
    R = "R"
    sigma = "sigma"


class Source(str, enum.Enum):
    HANKEL = "FromHankel"
    RECURSION = "FromRecursion"


@dataclass(frozen=True)
class RecursionTrace:
    t: mpmath.mpf
    quantity: Quantity
    values: tuple
    source: Source
    work_bits: int = 256

    @classmethod
    def from_aux(cls, aux: AuxQuantities, quantity) -> "RecursionTrace":
        q = Quantity(quantity)
        return cls(aux.t, q, tuple(getattr(aux, q.value)), Source.HANKEL, aux.work_bits)


def _default_prec(aux):
    return PrecisionConfig(aux.work_bits, min(64, aux.work_bits - 1))


def _r_terms(t, r, n):
    lhs = -4 * _sign(n) * t * r[n]
    rhs = (n + r[n]) * (r[n + 1] + r[n]) * (r[n] + r[n - 1])
    return lhs, rhs


def _R_terms(t, R, n):
    a = 4 * _sign(n) * t
    lhs = a * ((n + 1) * R[n + 1] - n * R[n - 1]) + (2 * n + 1) * R[n + 1] * R[n] * R[n - 1]
    rhs = (a - R[n + 1] * R[n]) * (a + R[n] * R[n - 1])
    scale = (abs(a) * ((n + 1) * abs(R[n + 1]) + n * abs(R[n - 1])) + (2 * n + 1) * abs(R[n + 1] * R[n] * R[n - 1])
             + (abs(a) + abs(R[n + 1] * R[n])) * (abs(a) + abs(R[n] * R[n - 1])))
    return lhs, rhs, scale


def _sigma_terms(t, sg, n):
    a = 4 * _sign(n) * t
    X, Y = sg[n - 1] - sg[n], sg[n] - sg[n + 1]
    Q = a + X * Y
    Qa = abs(a) + abs(X * Y)
    lhs = a * n * (sg[n + 1] - sg[n - 1]) * Q + n ** 2 * X ** 2 * Y ** 2
    shifted = sg[n] - 2 * _parity(n) * t
    rhs = shifted * Q ** 2
    scale = abs(a) * n * abs(sg[n + 1] - sg[n - 1]) * Qa + n ** 2 * X ** 2 * Y ** 2 + abs(shifted) * Qa ** 2
    return lhs, rhs, scale


def _moment_ratios(t, prec):
    """``(mu_-2 / mu_0, mu_0 / mu_2)`` of the Gaussian weight."""
    table = build_moment_table(WeightSpec(Family.GAUSSIAN, t), -2, 2, prec)
    with prec.workprec():
        return table[-2] / table[0], table[0] / table[2]


def initial_data(t, prec: PrecisionConfig | None = None):
    """``(R_0, R_1)`` from the stated moment-ratio initial conditions.

    ``R_0 = 2t mu_-2/mu_0`` and ``R_1 = 2t mu_0/mu_2``; also ``r_1 = R_0``,
    ``sigma_1 = -R_0`` and ``sigma_2 = -R_0 - R_1``.
    """
    prec = prec or PrecisionConfig()
    q0, q1 = _moment_ratios(t, prec)
    with prec.workprec():
        tt = to_mpf(t)
        return 2 * tt * q0, 2 * tt * q1


def check_r_difference(aux: AuxQuantities, prec: PrecisionConfig | None = None) -> ResidualReport:
    """Residual of ``-4(-1)^n t r_n = (n + r_n)(r_{n+1} + r_n)(r_n + r_{n-1})`` for 1 <= n <= n_max-1."""
    if aux.n_max < 2:
        raise DomainError("need n_max >= 2")
    prec = prec or _default_prec(aux)
    res = {}
    with prec.workprec():
        for n in range(1, aux.n_max):
            lhs, rhs = _r_terms(aux.t, aux.r, n)
            res[n] = scaled_residual(lhs, rhs, abs(lhs) + abs(rhs))
    return ResidualReport("r_difference", aux.t, res)


def check_R_difference(aux: AuxQuantities, prec: PrecisionConfig | None = None) -> ResidualReport:
    """Residual of the second-order difference equation for R_n, 1 <= n <= n_max-1."""
    if aux.n_max < 2:
        raise DomainError("need n_max >= 2")
    prec = prec or _default_prec(aux)
    res = {}
    with prec.workprec():
        for n in range(1, aux.n_max):
            lhs, rhs, scale = _R_terms(aux.t, aux.R, n)
            res[n] = scaled_residual(lhs, rhs, scale)
    return ResidualReport("R_difference", aux.t, res)


def check_sigma_difference(aux: AuxQuantities, prec: PrecisionConfig | None = None) -> ResidualReport:
    """Residual of the second-order difference equation for sigma_n, 1 <= n <= n_max-1."""
    if aux.n_max < 3:
        raise DomainError("need n_max >= 3")
    prec = prec or _default_prec(aux)
    res = {}
    with prec.workprec():
        for n in range(1, aux.n_max):
            lhs, rhs, scale = _sigma_terms(aux.t, aux.sigma, n)
            res[n] = scaled_residual(lhs, rhs, scale)
    return ResidualReport("sigma_difference", aux.t, res)


def check_initial_conditions(aux: AuxQuantities, prec: PrecisionConfig | None = None):
    """Compare Hankel-derived r_1, R_0, R_1, sigma_1, sigma_2 with moment ratios and closed forms.

    Returns reports ``initial_moment_ratio`` and ``initial_closed_form`` keyed by
    0 (R_0), 1 (R_1), 2 (r_1), 3 (sigma_1), 4 (sigma_2).
    """
    if aux.n_max < 1:
        raise DomainError("need n_max >= 1")
    prec = prec or _default_prec(aux)
    R0, R1 = initial_data(aux.t, prec)
    with prec.workprec():
        st = mpmath.sqrt(aux.t)
        c0, c1 = 2 * st, 4 * aux.t / (2 * st + 1)
        have = (aux.R[0], aux.R[1], aux.r[1], aux.sigma[1], aux.sigma[2])
        ratio = (R0, R1, R0, -R0, -R0 - R1)
        closed = (c0, c1, c0, -c0, -c0 - c1)
        a = {k: scaled_residual(h, v, abs(v)) for k, (h, v) in enumerate(zip(have, ratio))}
        b = {k: scaled_residual(h, v, abs(v)) for k, (h, v) in enumerate(zip(have, closed))}
    return {"initial_moment_ratio": ResidualReport("initial_moment_ratio", aux.t, a),
            "initial_closed_form": ResidualReport("initial_closed_form", aux.t, b)}


def _step_r(t, r, n):
    den = (n + r[n]) * (r[n] + r[n - 1])
    if den == 0:
        raise DegeneracyError(n)
    return -4 * _sign(n) * t * r[n] / den - r[n]


def _step_R(t, R, n):
    a = 4 * _sign(n) * t
    P = R[n] * R[n - 1]
    den = a * (n + 1 + R[n]) + P * (2 * n + 1 + R[n])
    if den == 0:
        raise DegeneracyError(n)
    return a * (a + P + n * R[n - 1]) / den


def run_recursion(quantity, t, n_target: int, prec: PrecisionConfig | None = None) -> RecursionTrace:
    """Iterate a difference equation forward from moment-ratio initial data.

    Parameters
    ----------
    quantity : {"r", "R", "sigma"}
    t : positive real
    n_target : int
        Last index returned.
    prec : PrecisionConfig, optional

    Notes
    -----
    ``r`` starts from ``r_0 = 0, r_1 = R_0``. ``R`` starts from ``R_0, R_1``.
    ``sigma`` is produced by the R recursion and ``sigma_{n+1} = sigma_n - R_n``;
    the sigma equation itself is quadratic in the new value, the R
    equation is linear, and both carry the same information.

    Raises
    ------
    DegeneracyError
        When a step denominator vanishes.
    """
    q = Quantity(quantity)
    if n_target < 0:
        raise DomainError("n_target must be non-negative")
    prec = prec or PrecisionConfig()
    R0, R1 = initial_data(t, prec)
    with prec.workprec():
        tt = to_mpf(t)
        if tt <= 0:
            raise DomainError("t must be positive")
        if q is Quantity.r:
            vals = [mpmath.mpf(0), R0]
            for n in range(1, n_target):
                vals.append(_step_r(tt, vals, n))
        else:
            R = [R0, R1]
            top = n_target if q is Quantity.R else n_target - 1
            for n in range(1, top):
                R.append(_step_R(tt, R, n))
            if q is Quantity.R:
                vals = R
            else:
                vals = [mpmath.mpf(0)]
                for n in range(n_target):
                    vals.append(vals[-1] - R[n])
    return RecursionTrace(tt, q, tuple(vals[: n_target + 1]), Source.RECURSION, prec.work_bits)


@dataclass(frozen=True)
class RecursionComparison:
    """Forward recursion against Hankel data.

    ``deviation[n]`` is the scaled difference from the Hankel trace;
    ``growth[n]`` is the measured amplification of a unit rounding error,
    ``|x_p(n) - x_2p(n)| / (2^-p max(1, |x|))``; ``divergence_index`` is the
    first n whose deviation exceeds ``threshold`` (None if none does).
    """

    quantity: Quantity
    t: mpmath.mpf
    recursion: RecursionTrace
    hankel: RecursionTrace
    deviation: dict
    growth: dict
    threshold: mpmath.mpf
    divergence_index: int | None

    @property
    def max_deviation(self):
        return max(self.deviation.values())

    @property
    def growth_envelope(self):
        """Running maximum of ``growth``; monotone by construction, the raw factor need not be."""
        env, top = {}, 0
        for n in sorted(self.growth):
            top = max(top, self.growth[n])
            env[n] = top
        return env


def compare_with_hankel(quantity, aux: AuxQuantities, n_target: int | None = None,
                        prec: PrecisionConfig | None = None, threshold=None) -> RecursionComparison:
    """Run the recursion at ``prec`` and at doubled precision and compare with ``aux``.

    The default recursion precision is twice the Hankel working precision.
    """
    q = Quantity(quantity)
    hank = RecursionTrace.from_aux(aux, q)
    n_target = min(n_target if n_target is not None else aux.n_max, len(hank.values) - 1)
    prec = prec or PrecisionConfig(2 * aux.work_bits, min(128, aux.work_bits))
    rec = run_recursion(q, aux.t, n_target, prec)
    ref = run_recursion(q, aux.t, n_target, prec.doubled())
    with prec.workprec():
        threshold = to_mpf(threshold) if threshold is not None else mpmath.mpf(10) ** -20
        eps = mpmath.ldexp(1, -prec.work_bits)
        dev, growth = {}, {}
        diverged = None
        for n in range(n_target + 1):
            x, h, y = rec.values[n], hank.values[n], ref.values[n]
            dev[n] = scaled_residual(x, h, abs(h))
            growth[n] = abs(x - y) / (eps * max(1, abs(y)))
            if diverged is None and dev[n] > threshold:
                diverged = n
    if diverged is not None:
        log.warning("%s recursion at t=%s departs from Hankel data at n=%d", q.value,
                    mpmath.nstr(aux.t, 8), diverged)
    return RecursionComparison(q, aux.t, rec, hank, dev, growth, threshold, diverged)
