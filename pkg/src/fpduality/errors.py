"""Errors shared across the package."""


class FPDError(Exception):
    pass


class CapExceeded(FPDError):
    """A size cap was exceeded; carries a forecast of the offending size."""

    def __init__(self, message, forecast=None):
        super().__init__(message)
        self.forecast = forecast


class BudgetExceeded(FPDError):
    """A search budget ran out before an answer was established."""


class FormatError(FPDError):
    """A file or value violates its schema; carries a JSON-ish path."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class LabellingError(FPDError):
    """The greedy ball labelling ran out of labels."""
