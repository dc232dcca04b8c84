"""Exception hierarchy shared by all retrodictor modules."""

from __future__ import annotations


class RetrodictorError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RetrodictorError):
    """Input data violates a domain invariant (carries the measured residuals)."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"validation failed: {lines}")


class DimensionMismatch(RetrodictorError):
    """Operands live in different Hilbert-space dimensions."""


class NonHermitianInput(RetrodictorError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class SingularOperator(RetrodictorError):
    """A pole function (inverse square root) was requested on a rank-deficient operator."""


class ZeroProbabilityOutcome(RetrodictorError):
    """Conditioning on an outcome whose probability is below the floor."""


class NumericIntegrityError(RetrodictorError):
    """A computed quantity violates an exact identity by more than roundoff allows."""
