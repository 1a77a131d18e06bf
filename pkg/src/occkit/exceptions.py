"""
Error types shared by the library and the command-line interface.
"""
from typing import Optional


class OccError(Exception):
    """
    Base class for all occkit errors.

    Each subclass carries the exit code the CLI reports for it.
    """

    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def add_context(self, context: str) -> None:
        """
        Prefix the message with context, e.g. the task and fold being evaluated.

        Args:
            context: Short description of where the error happened.
        """
        self.message = f"{context}: {self.message}"
        self.args = (self.message,) + self.args[1:]

    def __str__(self) -> str:
        return self.message


class ShapeError(OccError):
    """Dimension mismatch, ragged rows or an empty table."""

    exit_code = 3


class ValidationError(OccError):
    """A cell that is missing, non-numeric or non-finite."""

    exit_code = 3

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.row = row
        self.column = column


class InsufficientDataError(OccError):
    """Too few rows for the requested operation."""

    exit_code = 3


class InvalidArgumentError(OccError, ValueError):
    """A scalar argument outside its admissible range."""

    exit_code = 3


class ConvergenceError(OccError):
    """The dual solver hit its iteration cap before reaching tolerance."""

    exit_code = 4

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class DataFileError(OccError):
    """A file that cannot be found, read or parsed."""

    exit_code = 2
