"""Domain errors raised by the toolkit. Each maps to a CLI exit code."""


class ToolkitError(Exception):
    """Base class for every domain error."""
    exit_code = 1


class ContractViolation(ToolkitError):
    """A documented precondition was not met."""


class ConfigError(ToolkitError):
    """A configuration file or profile could not be resolved."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = "{} (line {}, column {})".format(message, line, column)
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownKeyError(ConfigError):
    def __init__(self, key, suggestion=None):
        message = "unknown configuration key '{}'".format(key)
        if suggestion:
            message += "; did you mean '{}'?".format(suggestion)
        super().__init__(message)
        self.key = key
        self.suggestion = suggestion


class AdmissionFailure(ToolkitError):
    """The scheduler cannot fit every flow into the service interval."""

    def __init__(self, message, rejected=()):
        super().__init__(message)
        self.rejected = list(rejected)


class SymbolCountMismatch(ToolkitError):
    pass


class FrameError(ToolkitError):
    pass


class NoFrameDetected(FrameError):
    pass


class NonInvertibleConfiguration(ToolkitError):
    pass


class InvalidExchange(ToolkitError):
    """Round-trip time shorter than the reply time."""


class DegenerateGeometry(ToolkitError):
    def __init__(self, message, condition):
        super().__init__("{} (condition {:.3e})".format(message, condition))
        self.condition = condition


class InsufficientRanging(ToolkitError):
    pass


class FeatureError(ToolkitError):
    pass


class SingleClassDataset(ToolkitError):
    pass
