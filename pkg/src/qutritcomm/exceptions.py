"""Custom exceptions for qutritcomm."""


class QutritCommError(Exception):
    """Base exception for all qutritcomm errors."""

    exit_code = 1


class InvalidInputError(QutritCommError):
    """Raised when a protocol input is outside its allowed range."""

    def __init__(self, message, field=None, value=None):
        super().__init__(message)
        self.field = field
        self.value = value


class PromiseViolationError(InvalidInputError):
    """Raised when CCP inputs break the promise S_a + S_b + S_c = 0 (mod 3)."""

    def __init__(self, message, total=None):
        super().__init__(message, field="promise", value=total)
        self.total = total


class UnnormalizedStateError(QutritCommError):
    """Raised when a qutrit state is not a unit vector."""

    def __init__(self, message, norm=None):
        super().__init__(message)
        self.norm = norm


class InvalidRoundError(QutritCommError):
    """Raised when a round fails sifting but is used as if it were valid."""

    pass


class InsufficientSharesError(QutritCommError):
    """Raised when fewer than two parties collaborate to reconstruct a share."""

    pass


class CalibrationError(QutritCommError):
    """Raised when a drift calibration target cannot be reached."""

    def __init__(self, message, target=None):
        super().__init__(message)
        self.target = target


class AnalysisError(QutritCommError):
    """Raised when statistics are requested over empty data."""

    pass


class ConfigurationError(QutritCommError):
    """Raised when there's a configuration problem."""

    exit_code = 2


class VerificationError(QutritCommError):
    """Raised when an exhaustive check or a classical bound is violated."""

    exit_code = 3

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = list(failures or [])


class OutputError(QutritCommError):
    """Raised when a report cannot be written."""

    exit_code = 4

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
