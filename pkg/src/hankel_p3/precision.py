"""Working-precision policy shared by every numerical routine."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import DomainError

#: Environment variable consulted by the CLI for the default ``work_bits``.
PREC_ENV_VAR = "HANKEL_P3_PREC_BITS"


@dataclass(frozen=True)
class PrecisionConfig:
    """Binary working precision plus the residual tolerance derived from it.

    The acceptance threshold for identity residuals is
    ``2**-(work_bits - guard_bits - tol_exponent)``.
    """

    work_bits: int = 256
    guard_bits: int = 64
    tol_exponent: int = 0

    def __post_init__(self):
        if int(self.work_bits) != self.work_bits or self.work_bits < 64:
            raise DomainError(f"work_bits must be an integer >= 64, got {self.work_bits}")
        if not 0 < self.guard_bits < self.work_bits:
            raise DomainError("guard_bits must satisfy 0 < guard_bits < work_bits")

    @classmethod
    def for_order(cls, n_max: int, tol_exponent: int = 0) -> "PrecisionConfig":
        """Default policy for Hankel orders up to ``n_max``.

        Hankel moment matrices shed O(n) bits, so both the working precision
        and the guard band grow linearly with the largest order.
        """
        work = max(256, 64 + 12 * n_max)
        return cls(work_bits=work, guard_bits=64 + 4 * n_max, tol_exponent=tol_exponent)

    @property
    def tolerance(self) -> mpmath.mpf:
        return mpmath.ldexp(mpmath.mpf(1), -(self.work_bits - self.guard_bits - self.tol_exponent))

    @property
    def digits(self) -> int:
        """Decimal digits used when serializing values computed at this precision."""
        return math.ceil(self.work_bits * 0.3010)

    def doubled(self) -> "PrecisionConfig":
        return replace(self, work_bits=2 * self.work_bits, guard_bits=2 * self.guard_bits)

    def workprec(self):
        return mp.workprec(self.work_bits)


def to_mpf(x) -> mpmath.mpf:
    """Convert an int, Fraction, decimal string, float or mpf at the current precision."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, str) and "/" in x:
        return to_mpf(Fraction(x))
    return mpmath.mpf(x)


def as_fraction(x) -> Fraction | None:
    """Exact rational value of ``x`` if it has one that is cheap to recover."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return None
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            return None
        sign, man, exp, _ = x._mpf_
        return (-1) ** sign * Fraction(man) * Fraction(2) ** exp
    return None
