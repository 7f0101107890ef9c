"""Exception types shared across the library."""


class ComposureError(Exception):
    """Base class for all library-specific errors."""


class UnboundedSet(ComposureError):
    """Measure requested for a set with an infinite endpoint."""


class ScheduleTooFat(ComposureError):
    """A removal schedule does not fit inside the surviving intervals."""


class DomainError(ComposureError):
    """Argument outside the mathematical domain of an operation."""


class PrecisionUnreachable(ComposureError):
    """Requested error bound cannot be met within the numeric budget."""


class IsolatedPoint(ComposureError):
    """No admissible sample point exists near the requested point."""


class SamplerExhausted(ComposureError):
    """The sampling policy produced no usable difference quotients."""


class PreconditionUnmet(ComposureError):
    """A documented operation precondition failed."""


class NotPiecewiseMonotone(ComposureError):
    """Preimage requested for a function outside the invertible class."""


class StubPiece(ComposureError):
    """Evaluation requested inside a declared singular stub."""


class MetadataMissing(ComposureError):
    """A criterion needs derivative metadata a piece does not carry."""


class SingularPartPresent(ComposureError):
    """A criterion requires the singular part of the function to vanish."""
