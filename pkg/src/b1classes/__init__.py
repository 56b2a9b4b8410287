"""Numerical toolkit for De Giorgi classes under generalized Orlicz growth.

Modules
-------
growth
    Growth families, primitives and the moduli ``lambda``, ``Lambda``.
conditions
    Sampled structural checks, regime classification, ``lambda`` admissibility.
iteration
    De Giorgi lemma, threshold constants and oscillation-decay traces.
solver
    Finite-volume solvers and discrete diagnostics.
cli
    Command-line front end (``b1classes``).
"""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (B1Error, DomainError, InvariantViolation, NonConvergenceError,  # noqa: E402
                     NumericalError, UsageError)
from .growth import Family, GrowthSpec, LambdaFamily, LambdaSpec  # noqa: E402
from .logradius import LogRadius  # noqa: E402

__all__ = [
    "__version__", "B1Error", "DomainError", "InvariantViolation", "NonConvergenceError",
    "NumericalError", "UsageError", "Family", "GrowthSpec", "LambdaFamily", "LambdaSpec", "LogRadius",
]
