"""Residual bookkeeping shared by the verification modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import mpmath


def scaled_residual(lhs, rhs, scale):
    """``|lhs - rhs|``, made relative when the identity's dominant magnitude exceeds 1.

    ``scale`` should bound the size of the terms entering the identity (for
    example the same expression evaluated with every term made non-negative),
    so cancellation among large terms is not mistaken for a violation.
    """
    return abs(lhs - rhs) / max(mpmath.mpf(1), abs(scale))


@dataclass(frozen=True)
class ResidualReport:
    """Scaled residuals of one identity, keyed by the integer parameter ``n``."""

    name: str
    t: object
    residuals: Mapping[int, mpmath.mpf] = field(default_factory=dict)

    @property
    def worst(self):
        if not self.residuals:
            return mpmath.mpf(0)
        return max(self.residuals.values())

    @property
    def worst_index(self):
        if not self.residuals:
            return None
        return max(self.residuals, key=lambda n: self.residuals[n])

    def within(self, tol) -> bool:
        return all(r <= tol for r in self.residuals.values())

    def rows(self):
        """``(name, n, t, residual)`` tuples in ascending ``n``."""
        return [(self.name, n, self.t, self.residuals[n]) for n in sorted(self.residuals)]


def merge(reports):
    """Combine reports of the same identity at the same ``t`` by taking the worst value per n."""
    out = {}
    for rep in reports:
        cur = out.get(rep.name)
        if cur is None:
            out[rep.name] = dict(rep.residuals)
        else:
            for n, r in rep.residuals.items():
                cur[n] = max(cur.get(n, r), r)
    t = reports[0].t if reports else None
    return {name: ResidualReport(name, t, res) for name, res in out.items()}
