class CfSelectError(Exception):
    """Base class of every error raised by cfselect."""


class InvalidInputError(CfSelectError, ValueError):
    """Raised for non-finite scalars, zero or mismatched coefficient vectors and
    zero channel gains."""


class BudgetExceededError(CfSelectError, RuntimeError):
    """Raised when an exhaustive enumeration would exceed its configured budget."""


class ThresholdTableMissError(CfSelectError, KeyError):
    """Raised when a threshold table has no row for the requested (ring, L)."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ThresholdParseError(CfSelectError, ValueError):
    """Raised for malformed threshold-table text. Carries the 1-based line number."""

    def __init__(self, line_number: int, message: str) -> None:
        super().__init__(f"Line {line_number}: {message}")
        self.line_number = line_number


class ConfigError(CfSelectError, ValueError):
    """Raised for invalid experiment or command-line configuration."""


class ReductionError(CfSelectError, RuntimeError):
    """Internal numerical failure: iteration cap, Cholesky failure or an empty
    candidate set."""
