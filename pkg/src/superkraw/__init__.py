"""Multivariate super Krawtchouk polynomials."""

from .params import (
    EvenParams,
    OddParams,
    ParamSet,
    binary_paramset,
    dualize,
    random_paramset,
    validate,
)
from .krawtchouk import eval_p, eval_p0, eval_p1, p_matrix, transition_matrix
from .superpoly import SuperPolynomial, basis

__version__ = "0.1.0"

__all__ = [
    "EvenParams",
    "OddParams",
    "ParamSet",
    "SuperPolynomial",
    "basis",
    "binary_paramset",
    "dualize",
    "eval_p",
    "eval_p0",
    "eval_p1",
    "p_matrix",
    "random_paramset",
    "transition_matrix",
    "validate",
]
