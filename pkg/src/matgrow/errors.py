"""Exception types shared across the package."""

from __future__ import annotations


class BudgetExceeded(RuntimeError):
    """A search ran out of its node/query budget before reaching a verdict."""


class CertificateError(ValueError):
    """A projection certificate violates one of its defining invariants."""

    def __init__(self, invariant: str, detail: str = ""):
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
        self.invariant = invariant


class RegimeError(ValueError):
    """An exhaustive procedure was asked to run beyond its supported size."""
