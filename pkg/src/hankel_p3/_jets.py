"""Truncated Taylor arithmetic: a jet ``[c0, c1, ..., cJ]`` stands for ``sum c_k eps^k``."""

from math import factorial

import mpmath


def mul(a, b):
    J = len(a) - 1
    return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(J + 1)]


def inv(a):
    J = len(a) - 1
    out = [1 / a[0]]
    for k in range(1, J + 1):
        out.append(-sum(a[i] * out[k - i] for i in range(1, k + 1)) / a[0])
    return out


def log_derivatives(a):
    """Derivatives ``[ln f, (ln f)', (ln f)'', ...]`` of ``f`` whose jet is ``a``."""
    J = len(a) - 1
    # g' = f'/f as a series, then integrate term-wise
    fp = [(k + 1) * a[k + 1] for k in range(J)]
    q = mul(fp, inv(a[:J])) if J else []
    out = [mpmath.log(a[0])]
    for k in range(J):
        # coefficient k of (ln f)' equals (ln f)^{(k+1)} / k!
        out.append(q[k] * factorial(k))
    return out
