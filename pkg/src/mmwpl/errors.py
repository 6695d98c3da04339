"""Exception types shared across the package."""


class MmwplError(ValueError):
    """Base class for all package errors that signal bad input or data."""


class DatasetError(MmwplError):
    pass


class SchemaError(DatasetError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class ParseError(DatasetError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ValidationError(DatasetError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class DomainError(MmwplError):
    """Model evaluated outside the region where it is defined."""


class FitError(MmwplError):
    """A fitter's preconditions do not hold for the supplied data."""


class ConfigError(MmwplError):
    pass
