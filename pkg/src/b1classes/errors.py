"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class B1Error(Exception):
    """Base class for every error raised by the package."""


class DomainError(B1Error, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class InvariantViolation(B1Error, ValueError):
    """A declared structural invariant does not hold at a sampled point."""


class UsageError(B1Error, ValueError):
    """The call itself is malformed (empty sample plan, bad geometry, ...)."""


class NumericalError(B1Error, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NonConvergenceError(NumericalError):
    """A nonlinear solve stopped at its iteration cap."""

    def __init__(self, message: str, residual_history=(), step: int | None = None):
        super().__init__(message, {"residual_history": list(residual_history), "step": step})
        self.residual_history = list(residual_history)
        self.step = step
