"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when data violates a documented invariant (bad shapes, NaNs, ...)."""


class MotionParseError(ValidationError):
    """Raised when a motion or group-map file cannot be parsed."""


class VocabularyError(ValidationError):
    """Raised when a prompt is not part of the model vocabulary."""


class MissingModelError(FileNotFoundError):
    """Raised when a checkpoint is required but absent or unreadable."""
