"""Exception hierarchy shared across the harness.

The CLI maps these onto exit codes: configuration and data problems exit 1,
backend failures exit 2, I/O failures exit 3.
"""


class ReqgridError(Exception):
    pass


class ConfigError(ReqgridError):
    pass


class SchemaError(ConfigError):
    """A dataset file is missing a required column."""


class RowError(ConfigError):
    """A dataset row is malformed. Carries the 1-based file line number."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class IntegrityError(ConfigError):
    pass


class VariationError(ConfigError):
    pass


class TemplateError(ConfigError):
    pass


class LexiconError(ConfigError):
    pass


class DesignError(ReqgridError):
    """An experimental design is incomplete or degenerate."""


class PartitionError(DesignError):
    pass


class BackendError(ReqgridError):
    pass


class BackendUnavailable(BackendError):
    pass


class ProtocolError(BackendError):
    pass


class BackendInputError(BackendError, ValueError):
    pass


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BACKEND = 2
EXIT_IO = 3
