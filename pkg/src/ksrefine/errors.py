"""Shared exception types.

DomainError subclasses map to CLI exit code 1; argparse usage failures exit 2.
"""

from __future__ import annotations

__all__ = ["DomainError", "QuadratureError", "BudgetExceededError", "IngestError"]


class DomainError(ValueError):
    """Invalid mathematical input or an unmet precondition."""


class QuadratureError(DomainError):
    """A quadrature error target could not be met at the configured grid ceiling."""


class BudgetExceededError(DomainError):
    """A bounded search ran out of budget; carries partial progress in args."""


class IngestError(DomainError):
    """Malformed external data; message carries the offending line number."""
