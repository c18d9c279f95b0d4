"""
Error types
Validation and fold failures raised across the toolkit
"""

from typing import Optional


class ValidationError(ValueError):
    """Invalid input, optionally located by file, row and column."""

    def __init__(self, message: str, path: Optional[str] = None,
                 row: Optional[int] = None, column: Optional[str] = None):
        self.path = path
        self.row = row
        self.column = column
        self.detail = message
        super().__init__(self._format(message))

    def _format(self, message: str) -> str:
        location = []
        if self.path is not None:
            location.append(f"file {self.path}")
        if self.row is not None:
            location.append(f"row {self.row}")
        if self.column is not None:
            location.append(f"column {self.column}")
        if not location:
            return message
        return f"{', '.join(location)}: {message}"


class SingularSystemError(ValidationError):
    """Unregularized ridge fit on a rank-deficient design."""


class FoldError(RuntimeError):
    """Failure inside one cross-validation fold."""

    def __init__(self, fold: int, method: str, cause: BaseException):
        self.fold = fold
        self.method = method
        self.cause = cause
        super().__init__(f"fold {fold} ({method}): {cause}")
