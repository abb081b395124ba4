"""Shared exception types.

Every failure mode in the package maps onto one of the classes below so
callers can tell apart bad inputs, genuine numerical breakdown, and
evaluations that landed on a gravitational singularity.
"""

from __future__ import annotations


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation."""


class NumericalFailure(RuntimeError):
    """An iterative scheme failed to converge.

    Carries the last residual so the caller can judge how close the
    iteration got before giving up.
    """

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (last residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class SingularityError(ArithmeticError):
    """An evaluation point collided with one of the attracting bodies.

    ``body`` is ``"center"`` for the fixed mass at the origin and
    ``"primary"`` for the moving mass.
    """

    def __init__(self, body: str, detail: str = ""):
        message = f"evaluation point coincides with the {body}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.body = body


class MeshTooCoarseError(RuntimeError):
    """Sampled data is too coarse to resolve the quantity being measured."""
