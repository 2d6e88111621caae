"""Effective bounds and complete solutions for multiplicative relations between terms of linear recurrences."""
from .errors import (
    HypothesisViolation, LinrecError, MalformedDocument, PrecisionExhausted, SearchExhausted, TestFailed,
    VerificationFailed,
)
from .recurrence import FIBONACCI, PADOVAN, PRESETS, SequenceSpec, solve_spectrum, tail_bound_params, terms
from .smooth import brute_force_oracle, is_perfect_power, multiplicative_dependence, smooth_split

__version__ = "0.1.0"

__all__ = [
    "FIBONACCI", "PADOVAN", "PRESETS", "SequenceSpec", "solve_spectrum", "tail_bound_params", "terms",
    "brute_force_oracle", "is_perfect_power", "multiplicative_dependence", "smooth_split",
    "HypothesisViolation", "LinrecError", "MalformedDocument", "PrecisionExhausted", "SearchExhausted",
    "TestFailed", "VerificationFailed", "__version__",
]
