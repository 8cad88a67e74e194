"""Exception hierarchy shared by every stage."""

from typing import Optional


class GroupTypeError(Exception):
    """Base class for all domain errors."""

    exit_code = 3


class DataError(GroupTypeError):
    """Raised when input data cannot be used as given."""

    exit_code = 2


class SchemaError(DataError):
    """Raised when a row of an input file violates its schema."""

    def __init__(self, message: str, path: Optional[str] = None, row: Optional[int] = None):
        self.path = path
        self.row = row
        location = ""
        if path is not None:
            location = f"{path}:{row}: " if row is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class InfeasibleConfigError(DataError):
    """Raised when a synthetic corpus configuration cannot be realized."""


class EvaluationError(DataError):
    """Raised when a prediction or evaluation step has unusable inputs."""


class PipelineError(GroupTypeError):
    """Wraps a failure in a pipeline stage, keeping the stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(f"[{stage}] {cause}")
