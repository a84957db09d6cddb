"""Exception hierarchy shared by every stage of the post-processing chain."""
from __future__ import annotations

from typing import Optional, Tuple


class CvqkdError(Exception):
    """Base class for errors raised by the cvqkd package."""


class DomainError(CvqkdError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnphysicalStateError(DomainError):
    """A covariance matrix violates the uncertainty principle."""


class SingularElementError(DomainError):
    """An octonion (or vector) has a norm too small to be inverted."""


class InsufficientDataError(DomainError):
    """Too few samples for a statistically meaningful estimate."""


class DegenerateRegressorError(DomainError):
    """The regressor of a linear fit carries no energy."""


class EstimationFailure(CvqkdError):
    """Parameter estimation produced bounds that cannot be used; the block is discarded."""


class NoFeasibleCodeError(CvqkdError):
    """No catalog code can be operated with a modulation variance in the allowed range."""


class RateAdaptationError(DomainError):
    """Requested rate cannot be reached by puncturing/shortening within the limits."""

    def __init__(self, message: str, achievable: Optional[Tuple[float, float]] = None) -> None:
        if achievable is not None:
            message = f"{message} (achievable rates: [{achievable[0]:.6f}, {achievable[1]:.6f}])"
        super().__init__(message)
        self.achievable = achievable


class CodeParseError(CvqkdError):
    """Malformed alist file or catalog manifest."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FrameFormatError(CvqkdError):
    """Malformed binary frame file or bit file."""


class ConfigError(CvqkdError, ValueError):
    """Invalid session configuration."""
