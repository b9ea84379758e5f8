"""Exception types and process exit codes shared across the package."""


class DiffdetError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(DiffdetError):
    """A physical or run configuration is invalid or inconsistent."""


class IngestError(DiffdetError):
    """A trace or table file could not be parsed."""


class AnalysisError(DiffdetError):
    """An analysis step received inputs it cannot process."""


# Exit codes used by the command line front end.
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_ANALYSIS = 4
