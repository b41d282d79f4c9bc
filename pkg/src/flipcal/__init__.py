"""Flip augmentation, Monte-Carlo fusion and calibration metrics for binary classifiers."""

from flipcal.core import (
    TIE,
    Decision,
    Label,
    Outcome,
    PredictionTensor,
    ProbPair,
    SampleRecord,
    argmax_class,
    confidence_of,
    validate_prob_pair,
)
from flipcal.errors import ConfigError, FlipcalError, InputError, InvariantViolation

__version__ = "0.1.0"

__all__ = [
    "TIE",
    "ConfigError",
    "Decision",
    "FlipcalError",
    "InputError",
    "InvariantViolation",
    "Label",
    "Outcome",
    "PredictionTensor",
    "ProbPair",
    "SampleRecord",
    "argmax_class",
    "confidence_of",
    "validate_prob_pair",
]
