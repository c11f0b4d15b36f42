"""Custom exception classes for solver and I/O error handling."""


class SolverError(Exception):
    """Base exception class for all solver exceptions."""

    def __init__(self, message: str, exit_code: int = 70):
        self.message = message
        self.exit_code = exit_code
        super().__init__(self.message)


class UsageError(SolverError):
    """Exception raised when command-line or config-file parameters are invalid."""

    def __init__(self, message: str = "Invalid usage"):
        super().__init__(message, exit_code=2)


class DimensionMismatchError(SolverError):
    """Exception raised when array shapes disagree with the configured (p, d)."""

    def __init__(self, message: str = "Dimension mismatch"):
        super().__init__(message, exit_code=65)


class NonFiniteInputError(SolverError):
    """Exception raised when a sample contains NaN or infinite values."""

    def __init__(self, message: str = "Non-finite value in input", position: int | None = None):
        self.position = position
        super().__init__(message, exit_code=65)


class NonFiniteStateError(SolverError):
    """Exception raised when the surrogate or the basis stops being finite."""

    def __init__(self, message: str = "Non-finite solver state"):
        super().__init__(message, exit_code=70)


class StreamParseError(SolverError):
    """Exception raised when a line of an input stream cannot be parsed."""

    def __init__(self, message: str = "Malformed input line", line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, exit_code=65)


class SingularSystemError(SolverError):
    """Exception raised when the ridge system cannot be factorized."""

    def __init__(self, message: str = "Singular linear system"):
        super().__init__(message, exit_code=70)


class DescentViolationError(SolverError):
    """Exception raised when a descent step increases the objective it minimizes."""

    def __init__(self, message: str = "Descent step increased the objective"):
        super().__init__(message, exit_code=70)


class TimeBudgetExceededError(SolverError):
    """Exception raised when a reference solver runs past its time budget."""

    def __init__(self, message: str = "Time budget exceeded"):
        super().__init__(message, exit_code=70)


class CheckpointError(SolverError):
    """Base exception for unreadable checkpoint files."""

    def __init__(self, message: str = "Invalid checkpoint"):
        super().__init__(message, exit_code=66)


class CheckpointFormatError(CheckpointError):
    """Exception raised when the file does not start with the checkpoint magic."""

    def __init__(self, message: str = "Not a checkpoint file"):
        super().__init__(message)


class CheckpointVersionError(CheckpointError):
    """Exception raised when the checkpoint was written by another format version."""

    def __init__(self, message: str = "Unsupported checkpoint version"):
        super().__init__(message)


class CheckpointChecksumError(CheckpointError):
    """Exception raised when the trailing CRC-32C does not match the payload."""

    def __init__(self, message: str = "Checkpoint checksum mismatch"):
        super().__init__(message)


class CheckpointTruncatedError(CheckpointChecksumError):
    """Exception raised when the file is shorter than its header declares."""

    def __init__(self, message: str = "Checkpoint is truncated"):
        super().__init__(message)


class BisectionStallWarning(UserWarning):
    """Warning emitted when the multiplier search hits its iteration cap."""
