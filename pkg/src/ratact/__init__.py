"""Trainable rational activation functions and their stability experiments."""

from .rational import (
    CONSTRAINED,
    ORIGINAL,
    RationalParams,
    asymptotic_bound,
    evaluate,
    fit_init,
    grad,
    preset,
)

__all__ = [
    "CONSTRAINED",
    "ORIGINAL",
    "RationalParams",
    "asymptotic_bound",
    "evaluate",
    "fit_init",
    "grad",
    "preset",
]

__version__ = "0.1.0"
