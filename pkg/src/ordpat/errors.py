"""Exception hierarchy. The CLI maps these onto exit codes."""


class OrdpatError(Exception):
    """Base class for all package errors."""


class DataError(OrdpatError, ValueError):
    """Input data cannot be analysed (too short, ties, non-finite values, ...)."""


class TieError(DataError):
    """Equal values inside a window; add jitter during preprocessing."""


class SeriesTooShortError(DataError):
    pass
