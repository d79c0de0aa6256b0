"""Exception hierarchy shared across the package."""


class CovertKeyError(Exception):
    """Base class for all package errors."""


class AlphabetError(CovertKeyError, ValueError):
    """Two distributions are defined over different alphabets, or a symbol is out of range."""


class DivergenceInfiniteError(CovertKeyError, ValueError):
    """A divergence is infinite because absolute continuity fails."""


class DomainError(CovertKeyError, ValueError):
    """A scalar argument lies outside the domain of a function."""


class ShapeError(CovertKeyError, ValueError):
    """Sequence lengths or array shapes are inconsistent."""


class NormalizationError(CovertKeyError, ValueError):
    """Probability masses are negative or do not sum to one."""


class PreconditionError(CovertKeyError, ValueError):
    """A documented precondition of a bound or formula does not hold."""


class DegenerateChannelError(PreconditionError):
    """A rate formula has a zero denominator for the given channel."""


class GuardError(CovertKeyError, RuntimeError):
    """An instance is too large for exact enumeration or codebook generation."""


class InfeasibleSelectionError(CovertKeyError, RuntimeError):
    """The codebook-size constraints admit no size with at least one key index."""


class SearchFailureError(CovertKeyError, RuntimeError):
    """A randomized search exhausted its retry budget."""

    def __init__(self, message, violation_rates=None):
        super().__init__(message)
        self.violation_rates = violation_rates or {}


class ChannelParseError(CovertKeyError, ValueError):
    """A channel or run configuration file is malformed."""
