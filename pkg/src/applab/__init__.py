"""Appell-Szasz summation-integral operators: weights, moments, rates and checks."""

from .appell import PowerSeriesPair, ValidationReport, WeightSequence, derivatives_at_one, validate, weight_sequence
from .exceptions import (
    AccuracyError,
    ApplabError,
    DivergentMomentError,
    DomainError,
    PositivityError,
    TruncationError,
    ValidationError,
)
from .functions import FunctionHandle, PiecewisePolynomial, function_preset, polynomial
from .kernel import KernelParams, kernel_integrate, kernel_raw_moment
from .moments import (
    CentralMoments,
    DiscrepancyReport,
    MomentVector,
    central_moments,
    derived_limit,
    discrepancy_report,
    limit_estimate,
    raw_moments,
    summarize_verdicts,
)
from .numerics import Accuracy, LimitFit, extrapolate_limit, log_gamma
from .operator import EvalOptions, OperatorSpec, apply, apply_grid, apply_monomial, preset
from .published import PUBLISHED_FORMULAS, published_formula
from .rates import (
    BoundCheckResult,
    ModulusEstimate,
    dbv_bound_check,
    dt_bound_constant,
    korovkin_check,
    lipschitz_check,
    local_bound_check,
    modulus1,
    modulus2,
    steklov_bound_check,
    steklov_mean,
    voronovskaja_check,
    weighted_convergence_check,
)

__version__ = "0.1.0"
