"""Exception hierarchy for the hankel_p3 package."""


class HankelError(Exception):
    """Base class for all package errors."""


class DomainError(HankelError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class PrecisionFailure(HankelError, ArithmeticError):
    """A pivot lost positivity; the working precision is insufficient.

    Attributes
    ----------
    index : int
        Index of the first pivot that was not strictly positive.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"non-positive pivot at index {index}; raise work_bits")


class DegeneracyError(HankelError, ArithmeticError):
    """A forward recursion step hit a vanishing denominator."""

    def __init__(self, n, message=None):
        self.n = n
        super().__init__(message or f"vanishing step denominator at n={n}")


class SingularityError(HankelError, ArithmeticError):
    """ODE integration approached a singularity or the step size underflowed."""

    def __init__(self, message, last_state=None):
        self.last_state = last_state
        super().__init__(message)


class QuadratureError(HankelError, ArithmeticError):
    """Quadrature failed to reach the requested accuracy."""

    def __init__(self, message, estimate=None):
        self.estimate = estimate
        super().__init__(message)
