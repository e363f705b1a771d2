"""Sieve-weight measures, simplex linear forms, weighted box norms and prime constellations."""

from .errors import (
    BudgetExceededError,
    ConfigurationError,
    DependentFormsError,
    DomainError,
    InvalidResidueError,
    ModulusError,
    NumericalInconsistencyError,
    PrimeSimplexError,
    SieveRangeError,
    WOverflowError,
)
from .estimator import EstimatorResult
from .gt_measure import GreenTaoMeasure, MeasureParams, Simplex, l_delta, pattern_weight
from .numtheory import SieveContext, WTrick, build_sieve, build_wtrick
from .simplex_forms import FormFamily, LinearForm, build_forms
from .weight_system import WeightSystem

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError", "ConfigurationError", "DependentFormsError", "DomainError", "InvalidResidueError",
    "ModulusError", "NumericalInconsistencyError", "PrimeSimplexError", "SieveRangeError", "WOverflowError",
    "EstimatorResult", "GreenTaoMeasure", "MeasureParams", "Simplex", "l_delta", "pattern_weight",
    "SieveContext", "WTrick", "build_sieve", "build_wtrick", "FormFamily", "LinearForm", "build_forms",
    "WeightSystem",
]
