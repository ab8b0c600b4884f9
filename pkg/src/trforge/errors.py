"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for every error this package raises on purpose."""


class ValidationError(ToolkitError):
    """Input data violates a documented invariant."""


class FormatError(ToolkitError):
    """A file does not match its declared binary or text format."""


class ParseError(ToolkitError):
    """Structured text (QA transcripts, judge replies) could not be parsed."""


class LlmError(ToolkitError):
    """Base class for chat-client failures."""


class TransportError(LlmError):
    """Retries exhausted on timeouts, rate limits, or 5xx responses."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class PermanentRequestError(LlmError):
    """The API rejected the request with a non-retryable status."""


class EmptyResponseError(LlmError):
    """The API returned a completion with no text."""


class BudgetExceededError(LlmError):
    """The configured request budget is spent."""


class UsageError(ToolkitError):
    """Bad command-line usage (maps to exit code 64)."""
