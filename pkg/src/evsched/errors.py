"""Exception types shared across the toolkit."""


class IngestionError(ValueError):
    """A data file is missing, malformed, or internally inconsistent."""


class InstanceError(ValueError):
    """A model instance violates a structural precondition."""


class InfeasibleError(RuntimeError):
    """No feasible schedule exists for the given instance."""

    def __init__(self, message: str, block_id: int | None = None):
        super().__init__(message)
        self.block_id = block_id


class SizeLimitError(ValueError):
    """Instance exceeds the configured exact-solve size limit."""


class TimeLimitError(RuntimeError):
    """The time limit expired before any feasible schedule was found."""
