"""Exception vocabulary shared across the library.

Every error raised by this package derives from ParetoPoolError so callers can
catch the whole family; the subclasses also derive from the closest builtin
(ValueError / RuntimeError) to stay friendly to generic handlers.
"""


class ParetoPoolError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(ParetoPoolError, ValueError):
    """An argument violates a documented precondition."""


class NumericalFailureError(ParetoPoolError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class ConfigError(ParetoPoolError, ValueError):
    """A configuration object is internally inconsistent or unusable."""


class SchemaError(ParetoPoolError, ValueError):
    """A dataset schema does not match the data it describes."""


class ParseError(ParetoPoolError, ValueError):
    """A data file could not be parsed; carries the offending location."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where += f" at row {row}"
        if column is not None:
            where += f" in column {column!r}"
        super().__init__(message + where)


class InsufficientDataError(ParetoPoolError, ValueError):
    """Too few rows or observations to compute the requested quantity."""


class EmptySelectionError(ParetoPoolError, ValueError):
    """A selection rule matched nothing."""


class ExhaustedCatalogError(ParetoPoolError, RuntimeError):
    """No unevaluated catalog rows remain to snap a proposal onto."""


class CampaignStateError(ParetoPoolError, RuntimeError):
    """The campaign is not in a state that allows the requested operation."""


class ProtocolError(ParetoPoolError, ValueError):
    """A live-loop message refers to something the campaign never issued."""


class DuplicateObservationError(ProtocolError):
    """An observation was submitted twice for the same suggestion."""
