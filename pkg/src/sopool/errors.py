"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: ValidationError/ConfigError -> 1,
NumericError -> 2, TensorFileError and OS-level I/O failures -> 3.
"""

from __future__ import annotations


class SopoolError(Exception):
    """Base class for all library errors."""


class ConfigError(SopoolError):
    """Invalid configuration value (bad Z, sigma, kind, flag combination)."""


class ValidationError(SopoolError):
    """Input violates an operation precondition (shape, domain, kind/beta)."""


class DimensionError(ValidationError):
    """Shape or dimensionality mismatch."""


class DomainError(ValidationError):
    """Value outside the mathematical domain of the requested function."""


class NumericError(SopoolError):
    """Non-finite values or numerically impossible state."""


class RankDeficiencyError(NumericError):
    """Matrix is singular where strict positive definiteness is required."""

    def __init__(self, smallest_eigenvalue: float):
        self.smallest_eigenvalue = float(smallest_eigenvalue)
        super().__init__(
            f"matrix is numerically singular: smallest eigenvalue "
            f"{self.smallest_eigenvalue:.6e}"
        )


class TensorFileError(SopoolError):
    """Malformed tensor file. Carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        self.offset = int(offset)
        super().__init__(f"{message} (byte offset {self.offset})")
