"""Exact and numeric tools for q-difference confluence of projective-space J-functions."""

from .errors import ConvergenceError, DomainError, QconfError
from .scalars import QQ_FIELD, NumericField, RatFuncField, default_bits

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "NumericField",
    "QQ_FIELD",
    "QconfError",
    "RatFuncField",
    "default_bits",
]
