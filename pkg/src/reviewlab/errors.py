"""Exception hierarchy shared across the toolkit.

The CLI maps these families onto distinct exit codes, so new exceptions
should subclass the family that matches how a caller must react:
data problems are permanent, transport problems are environmental, and
pipeline problems mean a generation stage gave up.
"""

from __future__ import annotations


class ReviewLabError(Exception):
    """Base class for all toolkit errors."""


class DataError(ReviewLabError):
    """Invalid, missing, or inconsistent input data."""


class CapacityError(DataError):
    """A sampling request exceeds what the corpus can supply."""

    def __init__(self, message: str, *, available: int, required: int) -> None:
        super().__init__(message)
        self.available = available
        self.required = required


class CoverageError(DataError):
    """A tournament entry set is missing a required review."""


class ReviewFormatError(ReviewLabError):
    """Base class for structured-review parsing and rendering failures."""


class StructureError(ReviewFormatError):
    """Stage markers are missing, duplicated, or interleaved."""


class ContentError(ReviewFormatError):
    """Markers are well-formed but a required stage is empty or unusable."""


class InvalidReviewError(ReviewFormatError):
    """A review value violates its own invariants and cannot be rendered."""

    def __init__(self, violations: list[str]) -> None:
        super().__init__("invalid structured review: " + "; ".join(violations))
        self.violations = violations


class TransportError(ReviewLabError):
    """A remote call failed for reasons that may be transient."""


class ThrottleError(TransportError):
    """The remote service asked us to slow down."""


class ProviderTimeoutError(TransportError):
    """A remote call did not complete within its deadline."""


class DecodeError(TransportError):
    """A remote service returned a payload we could not interpret."""


class ProviderRejectionError(ReviewLabError):
    """The provider rejected the request terminally; retrying is pointless."""


class ParseExhaustionError(ReviewLabError):
    """Every parse attempt on model output failed, retries included."""

    def __init__(self, message: str, *, last_text: str, attempts: int) -> None:
        super().__init__(message)
        self.last_text = last_text
        self.attempts = attempts


class TranscriptionError(ReviewLabError):
    """A raw review could not be converted into the structured format."""

    def __init__(self, message: str, *, raw_text: str) -> None:
        super().__init__(message)
        self.raw_text = raw_text


class PipelineError(ReviewLabError):
    """A review-generation stage failed after exhausting its retries."""

    def __init__(self, message: str, *, stage: str) -> None:
        super().__init__(message)
        self.stage = stage


class JudgeError(ReviewLabError):
    """A pairwise judge refused or produced an unusable verdict."""
