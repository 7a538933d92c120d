"""Multiprecision engine for the Hankel determinant of exp(-x^2 - t/x^2).

Moments come from half-integer Bessel-K closed forms; norms, recurrence
coefficients and exact t-derivatives come from a differentiated LDL
factorization; the remaining modules check the ladder identities,
difference and differential equations, and the double-scaling expansions.
"""

from .errors import (DegeneracyError, DomainError, HankelError, PrecisionFailure, QuadratureError,
                     SingularityError)
from .precision import PrecisionConfig
from .moments import Family, MomentTable, WeightSpec, bessel_k_half, build_moment_table, eval_moment, \
    eval_moment_derivative
from .hankel_core import (PolynomialCoeffs, RecurrenceData, compute_recurrence, hankel_determinant,
                          logdet_t_derivative, polynomial_coeffs)
from .ladder import AuxQuantities, LadderCoefficients, check_ladder_relations, check_S_identities, compute_aux
from .difference import (RecursionTrace, check_r_difference, check_R_difference, check_sigma_difference,
                         run_recursion)
from .painleve import (ODEState, ResidualGrid, integral_representation, integrate_p3, p3_residual,
                       riccati_residuals, scaled_sigma_form_residual, sigma_ode_residual)
from .series import SeriesExpansion, eval_series
from .scaling import (H_equation_residual, ScalingSample, convergence_report, laguerre_correspondence_check,
                      scaled_measurement)

__version__ = "0.1.0"
