"""Small-s and large-s expansions of the double-scaled quantities.

The parametric families C(s, alpha), H(s, alpha) and ln Delta(s, alpha) of the
singularly perturbed Laguerre ensemble are built with exact rational
coefficients for any rational alpha. The Gaussian-side composites follow from
the parity split:

    C1 = 2 C(s, -1/2),  C2 = 2 C(s, 1/2),
    sigma1 = sigma2 = 2 [H(s, 1/2) + H(s, -1/2)],
    ln Delta1 = ln Delta2 = ln Delta(s, 1/2) + ln Delta(s, -1/2).

Delta-type series are stored and evaluated on the log scale.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError
from .precision import PrecisionConfig, as_fraction, to_mpf


class Regime(str, enum.Enum):
    SMALL = "SmallS"
    LARGE = "LargeS"

    @classmethod
    def parse(cls, value) -> "Regime":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        if key in ("small", "smalls", "small-s", "small_s"):
            return cls.SMALL
        if key in ("large", "larges", "large-s", "large_s"):
            return cls.LARGE
        return cls(value)


NAMES = ("C", "H", "Delta", "C1", "C2", "sigma1", "sigma2", "Delta1", "Delta2")


@dataclass(frozen=True)
class Constant:
    """A closed-form constant carried by a log-scale series.

    ``parts`` is a tuple of ``(kind, argument, weight)`` with kind ``"c"``
    (``ln G(a+1) - (a/2) ln 2 pi`` at ``a = argument``) or ``"dyson"``
    (``ln 2 / 12 + 3 zeta'(-1)``, argument ignored).
    """

    parts: tuple

    @property
    def label(self):
        out = []
        for kind, arg, w in self.parts:
            body = f"c({arg})" if kind == "c" else "ln2/12+3zeta'(-1)"
            out.append(body if w == 1 else f"{w}*{body}")
        return " + ".join(out)

    def evaluate(self, prec: PrecisionConfig | None = None):
        prec = prec or PrecisionConfig()
        with prec.workprec():
            total = mpmath.mpf(0)
            for kind, arg, w in self.parts:
                v = barnes_constant(arg, prec) if kind == "c" else dyson_constant(prec)
                total += to_mpf(w) * v
            return total


@dataclass(frozen=True)
class SeriesExpansion:
    """Truncated expansion ``const + log_coeff * ln s + sum_k coeff_k s^(exponent_k)``.

    Exponents are strictly increasing for ``SmallS`` and strictly decreasing
    for ``LargeS``; terms with zero coefficient are never stored.
    """

    name: str
    regime: Regime
    alpha: Fraction | None
    terms: tuple
    log_coefficient: Fraction | None = None
    constant: Constant | None = None
    log_scale: bool = False

    def __post_init__(self):
        if self.name not in NAMES:
            raise DomainError(f"unknown series {self.name!r}")
        exps = [e for e, _ in self.terms]
        ordered = sorted(exps) if self.regime is Regime.SMALL else sorted(exps, reverse=True)
        if exps != ordered or len(set(exps)) != len(exps):
            raise DomainError("exponents must be strictly monotone in the regime's direction")

    def coefficient(self, exponent) -> Fraction:
        e = Fraction(exponent)
        for ex, c in self.terms:
            if ex == e:
                return c
        return Fraction(0)

    def as_dict(self):
        return {ex: c for ex, c in self.terms}


def _F(x):
    f = as_fraction(x)
    if f is None:
        raise DomainError(f"alpha must be rational, got {x}")
    return f


def _check_alpha(a: Fraction):
    if a == 0 or a * a in (1, 4, 9, 16, 25):
        raise DomainError(f"small-s coefficients are singular at alpha={a}")


def _clean(pairs):
    return tuple((Fraction(e), Fraction(c)) for e, c in pairs if c != 0)


def _small_denominators(a):
    q = a * a
    return (a, a ** 2 * (q - 1), a ** 3 * (q - 1) * (q - 4), a ** 4 * (q - 1) ** 2 * (q - 4) * (q - 9),
            a ** 5 * (q - 1) ** 2 * (q - 4) * (q - 9) * (q - 16),
            a ** 6 * (q - 1) ** 3 * (q - 4) ** 2 * (q - 9) * (q - 16) * (q - 25))


def _small_numerators(a):
    q = a * a
    return (1, 1, 1, 2 * q - 3, 11 * q - 36, 91 * q ** 3 - 1115 * q ** 2 + 4219 * q - 3600)


def c_series(alpha, regime) -> SeriesExpansion:
    """Expansion of the scaled ``a_n(t, alpha) / t``."""
    a, reg = _F(alpha), Regime.parse(regime)
    q = a * a
    if reg is Regime.SMALL:
        _check_alpha(a)
        den, num = _small_denominators(a), _small_numerators(a)
        signs = (1, -1, 3, -6, 5, -3)
        terms = [(k, Fraction(signs[k]) * num[k] / den[k]) for k in range(6)]
    else:
        terms = [(Fraction(-1, 3), 1), (Fraction(-2, 3), -a / 3), (Fraction(-4, 3), a * (q - 1) / 81),
                 (Fraction(-5, 3), q * (q - 1) / 243), (-2, a * (q - 1) / 243),
                 (Fraction(-7, 3), -2 * q * (q - 1) * (2 * q - 11) / 6561),
                 (Fraction(-8, 3), -5 * a * (q - 1) * (q * q - q - 15) / 19683)]
    return SeriesExpansion("C", reg, a, _clean(terms))


def h_series(alpha, regime) -> SeriesExpansion:
    """Expansion of the scaled ``t d/dt ln D~_n(t, alpha)``."""
    a, reg = _F(alpha), Regime.parse(regime)
    q = a * a
    if reg is Regime.SMALL:
        _check_alpha(a)
        den, num = _small_denominators(a), _small_numerators(a)
        factors = (Fraction(-1, 2), Fraction(1, 4), Fraction(-1, 2), Fraction(3, 4), Fraction(1, 2), Fraction(1, 4))
        terms = [(k + 1, factors[k] * num[k] / den[k]) for k in range(6)]
    else:
        terms = [(Fraction(2, 3), Fraction(-3, 4)), (Fraction(1, 3), a / 2), (0, (1 - 6 * q) / 36),
                 (Fraction(-1, 3), a * (q - 1) / 54), (Fraction(-2, 3), q * (q - 1) / 324),
                 (-1, a * (q - 1) / 486), (Fraction(-4, 3), -q * (q - 1) * (2 * q - 11) / 8748),
                 (Fraction(-5, 3), -a * (q - 1) * (q * q - q - 15) / 13122),
                 (-2, -q * (q - 1) * (8 * q - 33) / 26244)]
    return SeriesExpansion("H", reg, a, _clean(terms))


def delta_series(alpha, regime) -> SeriesExpansion:
    """Log-scale expansion of the scaled ``D~_n(t, alpha) / D~_n(0, alpha)``."""
    a, reg = _F(alpha), Regime.parse(regime)
    q = a * a
    if reg is Regime.SMALL:
        _check_alpha(a)
        den, num = _small_denominators(a), _small_numerators(a)
        factors = (Fraction(-1, 2), Fraction(1, 8), Fraction(-1, 6), Fraction(3, 16), Fraction(-1, 10),
                   Fraction(1, 24))
        terms = [(k + 1, factors[k] * num[k] / den[k]) for k in range(6)]
        return SeriesExpansion("Delta", reg, a, _clean(terms), log_scale=True)
    terms = [(Fraction(2, 3), Fraction(-9, 8)), (Fraction(1, 3), 3 * a / 2), (Fraction(-1, 3), -a * (q - 1) / 18),
             (Fraction(-2, 3), -q * (q - 1) / 216), (-1, -a * (q - 1) / 486),
             (Fraction(-4, 3), q * (q - 1) * (2 * q - 11) / 11664),
             (Fraction(-5, 3), a * (q - 1) * (q * q - q - 15) / 21870)]
    return SeriesExpansion("Delta", reg, a, _clean(terms), Fraction(1 - 6 * q, 36), Constant((("c", a, 1),)),
                           log_scale=True)


def _combine(name, parts, regime, **kw):
    acc = {}
    for weight, ser in parts:
        for e, c in ser.terms:
            acc[e] = acc.get(e, 0) + weight * c
    reverse = Regime.parse(regime) is Regime.LARGE
    terms = _clean(sorted(acc.items(), reverse=reverse))
    return SeriesExpansion(name, Regime.parse(regime), None, terms, **kw)


HALF = Fraction(1, 2)


def composite_series(name: str, regime) -> SeriesExpansion:
    """Gaussian-side series assembled from the alpha = +-1/2 families."""
    reg = Regime.parse(regime)
    if name == "C1":
        return _combine("C1", [(2, c_series(-HALF, reg))], reg)
    if name == "C2":
        return _combine("C2", [(2, c_series(HALF, reg))], reg)
    if name in ("sigma1", "sigma2"):
        return _combine(name, [(2, h_series(HALF, reg)), (2, h_series(-HALF, reg))], reg)
    if name in ("Delta1", "Delta2"):
        plus, minus = delta_series(HALF, reg), delta_series(-HALF, reg)
        if reg is Regime.SMALL:
            return _combine(name, [(1, plus), (1, minus)], reg, log_scale=True)
        # c(1/2) + c(-1/2) equals Dyson's constant; the composite carries it by name
        return _combine(name, [(1, plus), (1, minus)], reg, log_coefficient=plus.log_coefficient + minus.log_coefficient,
                        constant=Constant((("dyson", None, 1),)), log_scale=True)
    raise DomainError(f"unknown composite {name!r}")


def get_series(name: str, regime, alpha=None) -> SeriesExpansion:
    if name in ("C", "H", "Delta"):
        if alpha is None:
            raise DomainError(f"{name} requires alpha")
        return {"C": c_series, "H": h_series, "Delta": delta_series}[name](alpha, regime)
    return composite_series(name, regime)


@dataclass(frozen=True)
class SeriesValue:
    value: mpmath.mpf
    next_term_bound: mpmath.mpf
    terms_used: int
    regime: Regime


def eval_series(series: SeriesExpansion, s, truncation="auto", prec: PrecisionConfig | None = None,
                exponentiate: bool = False) -> SeriesValue:
    """Evaluate a truncated series at ``s``.

    Parameters
    ----------
    truncation : int or "auto"
        Number of power terms kept. ``"auto"`` stops before the
        smallest-magnitude term (optimal truncation). Constant and log parts are
        always included.
    exponentiate : bool
        For log-scale series, return ``exp`` of the sum; the bound is then
        mapped to ``value * (exp(bound) - 1)``.

    Notes
    -----
    ``next_term_bound`` is the magnitude of the first omitted term. When every
    stored term is used it falls back to the magnitude of the last term kept,
    a heuristic proxy since no remainder estimate exists.
    """
    prec = prec or PrecisionConfig()
    with prec.workprec():
        ss = to_mpf(s)
        if not ss > 0:
            raise DomainError("s must be positive")
        mags = [to_mpf(c) * ss ** to_mpf(e) for e, c in series.terms]
        if truncation == "auto":
            if not mags:
                k = 0
            else:
                k = min(range(len(mags)), key=lambda i: abs(mags[i]))
        else:
            k = int(truncation)
            if not 0 <= k <= len(mags):
                raise DomainError(f"truncation {k} outside 0..{len(mags)}")
        total = mpmath.fsum(mags[:k])
        if series.log_coefficient is not None:
            total += to_mpf(series.log_coefficient) * mpmath.log(ss)
        if series.constant is not None:
            total += series.constant.evaluate(prec)
        if k < len(mags):
            bound = abs(mags[k])
        elif mags:
            bound = abs(mags[-1])
        else:
            bound = mpmath.mpf(0)
        if exponentiate and series.log_scale:
            total = mpmath.exp(total)
            bound = total * mpmath.expm1(bound)
    return SeriesValue(total, bound, k, series.regime)


def eval_best(name: str, s, prec: PrecisionConfig | None = None, alpha=None, exponentiate=False) -> SeriesValue:
    """Optimally truncated value from whichever regime has the smaller next-term bound."""
    vals = [eval_series(get_series(name, reg, alpha), s, "auto", prec, exponentiate) for reg in Regime]
    return min(vals, key=lambda v: v.next_term_bound)


# --- constants --------------------------------------------------------------

def barnes_constant(alpha, prec: PrecisionConfig | None = None):
    """``c(alpha) = ln G(alpha + 1) - (alpha / 2) ln(2 pi)`` via mpmath's Barnes G."""
    prec = prec or PrecisionConfig()
    with prec.workprec():
        a = to_mpf(alpha)
        return mpmath.log(mpmath.barnesg(a + 1)) - a / 2 * mpmath.log(2 * mpmath.pi)


def log_glaisher(prec: PrecisionConfig | None = None):
    """``ln A`` from the Euler-Maclaurin expansion of the hyperfactorial.

    ``ln H(N) = sum k ln k = (N^2/2 + N/2 + 1/12) ln N - N^2/4 + ln A
    - sum_{k>=1} B_{2k+2} / ((2k)(2k+1)(2k+2)) N^(-2k)``; with N a few
    times the digit count the tail terms fall below working precision long
    before the series starts to diverge.
    """
    prec = prec or PrecisionConfig()
    with prec.workprec():
        digits = prec.digits + 10
        N = max(32, digits)
        with mpmath.workprec(prec.work_bits + 32):
            Nm = mpmath.mpf(N)
            lnH = mpmath.fsum(k * mpmath.log(k) for k in range(2, N + 1))
            main = (Nm ** 2 / 2 + Nm / 2 + mpmath.mpf(1) / 12) * mpmath.log(Nm) - Nm ** 2 / 4
            tail = mpmath.mpf(0)
            eps = mpmath.ldexp(1, -prec.work_bits - 16)
            for k in range(1, 4 * digits):
                term = mpmath.bernoulli(2 * k + 2) / ((2 * k) * (2 * k + 1) * (2 * k + 2)) / Nm ** (2 * k)
                tail += term
                if abs(term) < eps:
                    break
            val = lnH - main + tail
        return +val


def zeta_prime_minus_one(prec: PrecisionConfig | None = None):
    """``zeta'(-1) = 1/12 - ln A``."""
    prec = prec or PrecisionConfig()
    lnA = log_glaisher(prec)
    with prec.workprec():
        return mpmath.mpf(1) / 12 - lnA


def dyson_constant(prec: PrecisionConfig | None = None):
    """``ln 2 / 12 + 3 zeta'(-1)`` (about -0.4385011)."""
    prec = prec or PrecisionConfig()
    z = zeta_prime_minus_one(prec)
    with prec.workprec():
        return mpmath.log(2) / 12 + 3 * z
