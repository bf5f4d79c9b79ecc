"""Exception hierarchy for the toolkit; each class carries its CLI exit code."""
from typing import Iterable, Optional


class SsiKitError(Exception):
    """Base class for toolkit errors."""

    exit_code = 1


class ValidationError(SsiKitError):
    """Input data or parameters violate a precondition."""


class ConfigurationError(ValidationError):
    """Configuration refers to something that does not exist."""


class RecordParseError(ValidationError):
    """A single census row could not be parsed or validated."""

    def __init__(self, message: str, row_number: Optional[int] = None):
        self.row_number = row_number
        if row_number is not None:
            message = f"row {row_number}: {message}"
        super().__init__(message)


class DegenerateDataError(ValidationError):
    """Data has too few rows or no variance to support the computation."""


class DimensionError(ValidationError):
    """Array shapes do not agree."""


class SingularMatrixError(ValidationError):
    """Correlation matrix cannot be inverted."""


class AdequacyError(ValidationError):
    """Sampling adequacy is undefined or below the factorability threshold."""


class NoCommonFactorError(ValidationError):
    """The reduced correlation matrix has no positive leading eigenvalue."""


class OrphanBlockError(ValidationError):
    """Blocks without a matching census record."""

    def __init__(self, block_ids: Iterable[str]):
        self.block_ids = sorted(block_ids)
        preview = ', '.join(self.block_ids[:20])
        more = '' if len(self.block_ids) <= 20 else f" (+{len(self.block_ids) - 20} more)"
        super().__init__(f"blocks without locality mapping: {preview}{more}")


class DataIOError(SsiKitError):
    """A file is unreadable or malformed."""

    exit_code = 2
