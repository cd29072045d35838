"""Exception hierarchy. ``FoamfabError`` subclasses are user-facing errors."""
from __future__ import annotations


class FoamfabError(Exception):
    """Base class for input and configuration errors."""


class MeshParseError(FoamfabError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class MeshValidationError(FoamfabError):
    def __init__(self, message: str, edges=None):
        super().__init__(message)
        self.edges = list(edges or [])


class GeometryError(FoamfabError):
    pass


class CalibrationError(FoamfabError):
    pass


class ExtrapolationError(CalibrationError):
    pass


class PlanError(FoamfabError):
    pass


class InfeasibleDivisionError(PlanError):
    def __init__(self, message: str, column=None):
        super().__init__(message)
        self.column = column


class GCodeError(FoamfabError):
    pass


class GCodeParseError(GCodeError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmissionError(GCodeError):
    pass


class ConfigError(FoamfabError):
    pass


class DomainError(FoamfabError, ValueError):
    """Argument outside the domain of a formula."""


class TableLookupError(CalibrationError, LookupError):
    pass
