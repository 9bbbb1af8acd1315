"""Exception types with machine-readable error codes for the CLI."""


class SpinPovmError(ValueError):
    """Base class for validation failures; `code` is a stable string."""

    code = "invalid_input"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class SpinValueError(SpinPovmError):
    code = "invalid_spin"


class DimensionGuardError(SpinPovmError):
    code = "dimension_guard_exceeded"


class StateNormError(SpinPovmError):
    code = "unnormalized_state"


class PovmFormatError(SpinPovmError):
    code = "malformed_povm_file"


class PovmValidationError(SpinPovmError):
    code = "invalid_povm"


class UnsupportedCopiesError(SpinPovmError):
    code = "unsupported_copies"
