"""Exact moments of the singularly perturbed Gaussian and Laguerre weights.

Every moment reduces to

    int_0^inf y^(nu-1) exp(-y - t/y) dy = 2 t^(nu/2) K_nu(2 sqrt(t)),

and for the two weight families used here ``nu`` is a half-integer, so
``K_nu`` is elementary. The upward recurrence for ``K`` is numerically
growing (dominant solution), hence stable without Miller-type backward
sweeps.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from types import MappingProxyType
from typing import Mapping

import mpmath
from mpmath import mp

from .errors import DomainError
from .precision import PrecisionConfig, as_fraction, to_mpf


class Family(str, enum.Enum):
    GAUSSIAN = "GaussianSingular"
    LAGUERRE = "LaguerreSingular"


@dataclass(frozen=True)
class WeightSpec:
    """Weight ``exp(-x^2 - t/x^2)`` on the real line, or ``x^alpha exp(-x - t/x)`` on the half line.

    ``t`` and ``alpha`` may be ints, Fractions, decimal strings or mpf values;
    they are converted at the working precision of each computation.
    """

    family: Family
    t: object
    alpha: object = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if _sign(self.t) < 0:
            raise DomainError(f"t must be non-negative, got {self.t}")
        if self.family is Family.LAGUERRE:
            if self.alpha is None:
                raise DomainError("Laguerre family requires alpha")
            if _cmp_minus_one(self.alpha) <= 0:
                raise DomainError(f"alpha must exceed -1, got {self.alpha}")

    @property
    def unperturbed(self) -> bool:
        return _sign(self.t) == 0

    @property
    def shift(self) -> int:
        """Index shift of one t-derivative: d mu_k/dt = -mu_(k - shift)."""
        return 2 if self.family is Family.GAUSSIAN else 1

    def bessel_order(self, k: int):
        """Signed order nu with mu_k = 2 t^(nu/2) K_nu(2 sqrt t); exact Fraction when possible."""
        if self.family is Family.GAUSSIAN:
            return Fraction(k + 1, 2)
        a = as_fraction(self.alpha)
        if a is not None:
            return k + 1 + a
        return k + 1 + to_mpf(self.alpha)


def _sign(x) -> int:
    f = as_fraction(x)
    if f is not None:
        return (f > 0) - (f < 0)
    v = mpmath.mpf(x)
    return (v > 0) - (v < 0)


def _cmp_minus_one(x) -> int:
    f = as_fraction(x)
    if f is not None:
        return (f > -1) - (f < -1)
    v = mpmath.mpf(x)
    return (v > -1) - (v < -1)


def _half_integer_index(nu) -> int | None:
    """Return j with |nu| = j + 1/2, or None if nu is not a half-integer."""
    f = as_fraction(nu) if not isinstance(nu, Fraction) else nu
    if f is None:
        return None
    two_nu = 2 * abs(f)
    if two_nu.denominator != 1 or two_nu.numerator % 2 != 1:
        return None
    return (two_nu.numerator - 1) // 2


def _k_half_ladder(z, count):
    """[K_{1/2}(z), K_{3/2}(z), ..., K_{count-1/2}(z)] by upward recurrence."""
    k = [mpmath.sqrt(mpmath.pi / (2 * z)) * mpmath.exp(-z)]
    if count > 1:
        k.append(k[0] * (1 + 1 / z))
    for j in range(1, count - 1):
        # K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu with nu = j + 1/2
        k.append(k[j - 1] + (2 * j + 1) * k[j] / z)
    return k[:count]


def bessel_k_half(nu_half, z, prec: PrecisionConfig | None = None):
    """Modified Bessel function ``K_nu(z)`` for positive half-integer ``nu``.

    Parameters
    ----------
    nu_half : Fraction, str, int, float or mpf
        Order; must be one of 1/2, 3/2, 5/2, ...
    z : number
        Positive argument.
    prec : PrecisionConfig, optional
        Working precision (default 256 bits).

    Returns
    -------
    mpf
    """
    prec = prec or PrecisionConfig()
    f = as_fraction(nu_half)
    j = _half_integer_index(f) if f is not None else None
    if j is None or f <= 0:
        raise DomainError(f"order must be a positive half-integer, got {nu_half}")
    with prec.workprec():
        zz = to_mpf(z)
        if zz <= 0:
            raise DomainError(f"argument must be positive, got {z}")
        return _k_half_ladder(zz, j + 1)[j]


def _moment_from_ladder(spec: WeightSpec, k: int, t, ladder):
    nu = spec.bessel_order(k)
    if spec.family is Family.GAUSSIAN and k % 2:
        return mpmath.mpf(0)
    j = _half_integer_index(nu)
    nu_mpf = to_mpf(nu)
    if j is not None and ladder is not None and j < len(ladder):
        kv = ladder[j]
    else:
        # non-half-integer Laguerre exponent: general-order K from mpmath
        kv = mpmath.besselk(nu_mpf, 2 * mpmath.sqrt(t))
    return 2 * mpmath.power(t, nu_mpf / 2) * kv


def _unperturbed_moment(spec: WeightSpec, k: int):
    if spec.family is Family.GAUSSIAN:
        if k % 2:
            return mpmath.mpf(0)
        if k < 0:
            raise DomainError(f"unperturbed Gaussian moment of order {k} diverges")
        return mpmath.gamma(mpmath.mpf(k + 1) / 2)
    nu = to_mpf(spec.bessel_order(k))
    if nu <= 0:
        raise DomainError(f"unperturbed Laguerre moment of order {k} diverges")
    return mpmath.gamma(nu)


def eval_moment(spec: WeightSpec, k: int, prec: PrecisionConfig | None = None):
    """Moment ``mu_k(t)`` of the weight described by ``spec``.

    Gaussian odd moments are exactly zero. The unperturbed case ``t = 0`` uses
    the classical Gamma-function moments rather than a limit of the Bessel form.
    """
    prec = prec or PrecisionConfig()
    with prec.workprec():
        if spec.unperturbed:
            return _unperturbed_moment(spec, k)
        t = to_mpf(spec.t)
        j = _half_integer_index(spec.bessel_order(k))
        ladder = _k_half_ladder(2 * mpmath.sqrt(t), j + 1) if j is not None else None
        return _moment_from_ladder(spec, k, t, ladder)


def eval_moment_derivative(spec: WeightSpec, k: int, order: int, prec: PrecisionConfig | None = None):
    """``d^order mu_k / dt^order`` for order 1 or 2, from the shift identity."""
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    if spec.unperturbed:
        raise DomainError("moment derivatives require t > 0")
    value = eval_moment(spec, k - order * spec.shift, prec)
    return -value if order == 1 else value


@dataclass(frozen=True)
class MomentTable:
    """Immutable table of moments ``mu_k`` and first derivatives for k_min <= k <= k_max."""

    spec: WeightSpec
    k_min: int
    k_max: int
    values: Mapping[int, mpmath.mpf]
    d_values: Mapping[int, mpmath.mpf] = field(default_factory=dict)
    work_bits: int = 256

    def __getitem__(self, k: int):
        return self.values[k]

    def covers(self, k_lo: int, k_hi: int) -> bool:
        return self.k_min <= k_lo and k_hi <= self.k_max

    def taylor(self, k: int, order: int):
        """Taylor coefficients of ``mu_k(t + eps)`` in ``eps`` up to ``eps**order``."""
        s = self.spec.shift
        lo = k - order * s
        if lo < self.k_min:
            raise DomainError(f"table starts at {self.k_min}; order-{order} expansion of mu_{k} needs mu_{lo}")
        if order and self.spec.unperturbed:
            raise DomainError("t-expansions require t > 0")
        with mp.workprec(self.work_bits):
            return [(-1) ** j * self.values[k - j * s] / factorial(j) for j in range(order + 1)]

    def max_taylor_order(self) -> int:
        if self.spec.unperturbed:
            return 0
        return max(0, -self.k_min // self.spec.shift)

    def to_json(self, digits: int | None = None) -> str:
        digits = digits or PrecisionConfig(self.work_bits, 1).digits
        ks = list(range(self.k_min, self.k_max + 1))
        payload = {
            "family": self.spec.family.value,
            "t": _num_str(self.spec.t, digits),
            "alpha": None if self.spec.alpha is None else _num_str(self.spec.alpha, digits),
            "k": ks,
            "mu": [mpmath.nstr(self.values[k], digits) for k in ks],
            "dmu": [mpmath.nstr(self.d_values[k], digits) if k in self.d_values else None for k in ks],
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str, work_bits: int = 256) -> "MomentTable":
        data = json.loads(text)
        spec = WeightSpec(Family(data["family"]), data["t"], data["alpha"])
        with mp.workprec(work_bits):
            values = {k: mpmath.mpf(v) for k, v in zip(data["k"], data["mu"])}
            dvals = {k: mpmath.mpf(v) for k, v in zip(data["k"], data["dmu"]) if v is not None}
        return cls(spec, min(data["k"]), max(data["k"]), MappingProxyType(values),
                   MappingProxyType(dvals), work_bits)


def _num_str(x, digits):
    f = as_fraction(x) if not isinstance(x, float) else None
    if isinstance(x, (int, Fraction, str)) and f is not None:
        return str(f)
    return mpmath.nstr(mpmath.mpf(x), digits)


def build_moment_table(spec: WeightSpec, k_min: int, k_max: int, prec: PrecisionConfig | None = None) -> MomentTable:
    """Populate moments for ``k_min <= k <= k_max`` from a single Bessel ladder.

    Derivatives ``d_values[k] = -mu_(k - shift)`` are stored for every index;
    the extra lower moments they need are computed from the same ladder. At
    ``t = 0`` derivatives are stored only where they are finite.
    """
    if k_min > k_max:
        raise DomainError(f"empty index range [{k_min}, {k_max}]")
    prec = prec or PrecisionConfig()
    s = spec.shift
    with prec.workprec():
        if spec.unperturbed:
            values = {k: _unperturbed_moment(spec, k) for k in range(k_min, k_max + 1)}
            dvals = {}
            for k in range(k_min, k_max + 1):
                try:
                    dvals[k] = -_unperturbed_moment(spec, k - s)
                except DomainError:
                    pass
        else:
            t = to_mpf(spec.t)
            orders = [_half_integer_index(spec.bessel_order(k)) for k in range(k_min - s, k_max + 1)]
            ladder = None
            if all(j is not None for j in orders):
                ladder = _k_half_ladder(2 * mpmath.sqrt(t), max(orders) + 1)
            lower = {k: _moment_from_ladder(spec, k, t, ladder) for k in range(k_min - s, k_max + 1)}
            values = {k: lower[k] for k in range(k_min, k_max + 1)}
            dvals = {k: -lower[k - s] for k in range(k_min, k_max + 1)}
    return MomentTable(spec, k_min, k_max, MappingProxyType(values), MappingProxyType(dvals), prec.work_bits)
