"""Putback strategies, view-definition derivation and well-behavedness checks."""

from .derive import BxPair, Constraint, derive_get
from .put import put_apply, put_eval
from .strategy import (
    BUNDLED_STRATEGIES,
    EditClass,
    PutStrategy,
    load_strategy,
    parse_strategy,
)

__all__ = [
    "BUNDLED_STRATEGIES",
    "BxPair",
    "Constraint",
    "EditClass",
    "PutStrategy",
    "derive_get",
    "load_strategy",
    "parse_strategy",
    "put_apply",
    "put_eval",
]
