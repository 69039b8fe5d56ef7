"""Exceptions for the arsvd package."""

from __future__ import annotations

from .const import EXIT_CONTRACT, EXIT_IO, EXIT_NUMERICAL


class ArsvdError(Exception):
    """Base exception for arsvd."""

    exit_code: int = EXIT_CONTRACT

    def __init__(self, message: str = "An error occurred") -> None:
        """Initialize the exception."""
        super().__init__(message)
        self.message = message


class ContractViolationError(ArsvdError):
    """Exception raised when a caller breaks an operation's preconditions."""

    exit_code = EXIT_CONTRACT

    def __init__(self, message: str = "Contract violation") -> None:
        """Initialize the exception."""
        super().__init__(message)


class DimensionMismatchError(ContractViolationError):
    """Exception raised when operand shapes do not agree."""

    def __init__(self, message: str = "Dimension mismatch") -> None:
        """Initialize the exception."""
        super().__init__(message)


class ConfigurationError(ContractViolationError):
    """Exception raised for invalid configuration."""

    def __init__(self, message: str = "Configuration error") -> None:
        """Initialize the exception."""
        super().__init__(message)


class ManifestError(ContractViolationError):
    """Exception raised when a model manifest is inconsistent."""

    def __init__(self, message: str = "Invalid model manifest") -> None:
        """Initialize the exception."""
        super().__init__(message)


class DatasetError(ContractViolationError):
    """Exception raised for invalid dataset content."""

    def __init__(self, message: str = "Invalid dataset") -> None:
        """Initialize the exception."""
        super().__init__(message)


class EmptyDatasetError(DatasetError):
    """Exception raised when a dataset has no samples."""

    def __init__(self, message: str = "Dataset is empty") -> None:
        """Initialize the exception."""
        super().__init__(message)


class RaggedRowsError(DatasetError):
    """Exception raised when dataset rows have differing field counts."""

    def __init__(self, message: str = "Ragged dataset rows") -> None:
        """Initialize the exception."""
        super().__init__(message)


class NonNumericFieldError(DatasetError):
    """Exception raised when a dataset field cannot be parsed as a number."""

    def __init__(self, message: str = "Non-numeric dataset field") -> None:
        """Initialize the exception."""
        super().__init__(message)


class LabelRangeError(DatasetError):
    """Exception raised when a label falls outside [0, class_count)."""

    def __init__(self, message: str = "Label out of range") -> None:
        """Initialize the exception."""
        super().__init__(message)


class NumericalError(ArsvdError):
    """Exception raised for numerical failures."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str = "Numerical failure") -> None:
        """Initialize the exception."""
        super().__init__(message)


class SvdConvergenceError(NumericalError):
    """Exception raised when the Jacobi sweeps hit the iteration cap."""

    def __init__(
        self, residual: float, sweeps: int, message: str | None = None
    ) -> None:
        """Initialize the exception."""
        super().__init__(
            message
            or f"SVD did not converge after {sweeps} sweeps "
            f"(largest off-diagonal cosine {residual:.3e})"
        )
        self.residual = residual
        self.sweeps = sweeps


class TrainingDivergenceError(NumericalError):
    """Exception raised when the training loss becomes non-finite."""

    def __init__(self, epoch: int, message: str | None = None) -> None:
        """Initialize the exception."""
        super().__init__(message or f"Training diverged in epoch {epoch}")
        self.epoch = epoch


class ArsvdIOError(ArsvdError):
    """Exception raised for file input/output errors."""

    exit_code = EXIT_IO

    def __init__(self, message: str = "I/O error") -> None:
        """Initialize the exception."""
        super().__init__(message)


class ContainerError(ArsvdIOError):
    """Exception raised for malformed tensor containers."""

    def __init__(self, message: str = "Invalid tensor container") -> None:
        """Initialize the exception."""
        super().__init__(message)


class TruncatedContainerError(ContainerError):
    """Exception raised when a container ends before its declared content."""

    def __init__(self, message: str = "Truncated tensor container") -> None:
        """Initialize the exception."""
        super().__init__(message)


class BadMagicError(ContainerError):
    """Exception raised when the container magic bytes are wrong."""

    def __init__(self, message: str = "Bad container magic") -> None:
        """Initialize the exception."""
        super().__init__(message)


class UnsupportedVersionError(ContainerError):
    """Exception raised for container versions this reader cannot parse."""

    def __init__(self, message: str = "Unsupported container version") -> None:
        """Initialize the exception."""
        super().__init__(message)


class UnsupportedDtypeError(ContainerError):
    """Exception raised for unknown tensor dtype codes."""

    def __init__(self, message: str = "Unsupported tensor dtype") -> None:
        """Initialize the exception."""
        super().__init__(message)


class DuplicateTensorError(ContainerError):
    """Exception raised when two tensors share a name."""

    def __init__(self, message: str = "Duplicate tensor name") -> None:
        """Initialize the exception."""
        super().__init__(message)


class PayloadMismatchError(ContainerError):
    """Exception raised when a payload length disagrees with its dims."""

    def __init__(self, message: str = "Tensor payload does not match dims") -> None:
        """Initialize the exception."""
        super().__init__(message)


class ReportWriteError(ArsvdIOError):
    """Exception raised when a report cannot be written."""

    def __init__(self, message: str = "Cannot write report") -> None:
        """Initialize the exception."""
        super().__init__(message)


class ReportFormatError(ArsvdIOError):
    """Exception raised when a report file cannot be parsed."""

    def __init__(self, message: str = "Malformed report") -> None:
        """Initialize the exception."""
        super().__init__(message)


class LayerCompressionError(ArsvdError):
    """Exception raised when compressing one layer of a model fails."""

    def __init__(self, layer_index: int, cause: ArsvdError) -> None:
        """Initialize the exception."""
        super().__init__(f"Layer {layer_index}: {cause.message}")
        self.layer_index = layer_index
        self.cause = cause
        self.exit_code = cause.exit_code


class SweepPointError(ArsvdError):
    """Exception raised when one sweep coordinate fails."""

    def __init__(self, coordinate: str, cause: ArsvdError) -> None:
        """Initialize the exception."""
        super().__init__(f"Sweep point {coordinate}: {cause.message}")
        self.coordinate = coordinate
        self.cause = cause
        self.exit_code = cause.exit_code
