"""Exception types shared across the package."""


class OrthoclustError(Exception):
    """Base class for all package errors."""


class ValidationError(OrthoclustError):
    """Input data or configuration failed validation."""


class StageError(OrthoclustError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
