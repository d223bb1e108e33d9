"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ValidationError and its subclasses are
caller mistakes (exit 1), BackendError and its subclasses are model-backend
or transport failures (exit 2), anything else is an internal error (exit 3).
"""

from __future__ import annotations


class CrosscheckError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CrosscheckError):
    """Caller-supplied input violated a documented precondition."""


class SpanError(ValidationError):
    """A character span is out of bounds or empty after trimming."""


class FixtureParseError(ValidationError):
    """A fixture file failed to parse; message carries entry diagnostics."""


class DuplicateFixtureKeyError(FixtureParseError):
    """Two fixture entries share the same lookup key."""


class BackendError(CrosscheckError):
    """A model backend could not produce a usable response."""


class TransportError(BackendError):
    """HTTP transport failed after exhausting the retry budget."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class MissingCredentialError(BackendError):
    """A live backend was requested without the credential env var set."""


class FixtureUnderflowError(BackendError):
    """The fixture has fewer generations left than were requested."""


class MissingFixtureEntryError(BackendError):
    """A strict fixture table has no entry for the requested key."""

    def __init__(self, capability: str, key: object):
        super().__init__(f"no {capability} fixture entry for key {key!r}")
        self.capability = capability
        self.key = key


class EmptyDecompositionError(CrosscheckError):
    """Claim decomposition produced no parseable claims."""


class MalformedQuestionError(CrosscheckError):
    """A generated question did not end with a question mark."""


class UndefinedScoreError(CrosscheckError):
    """A consistency score was requested with no additional samples."""


class UndefinedMetricError(CrosscheckError):
    """AUROC was requested for a single-class label vector."""


class SessionNotFoundError(CrosscheckError):
    """No stored session matches the requested id."""


class UnknownTargetError(CrosscheckError):
    """An evidence lookup referenced an unknown cluster or claim id."""
