"""
Exceptions raised by the numeric core. Each one carries the `Error` it reports.
"""
from pyafn.errsys.tools import Error


class AFNException(Exception):
    def __init__(self, error: Error) -> None:
        super().__init__(error.summary)
        self.error = error


class ShapeError(AFNException):
    ...


class NumericDomainError(AFNException):
    ...


class TapeStateError(AFNException):
    ...


class ConfigError(AFNException):
    ...


class DataError(AFNException):
    ...


class InternalError(AFNException):
    ...
