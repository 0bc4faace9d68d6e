"""Exception hierarchy shared by all lcxplan modules."""

from __future__ import annotations


class LcxError(Exception):
    """Base class for every error raised by lcxplan."""


class DomainError(LcxError, ValueError):
    """An input lies outside the domain of an operation."""


class ConfigurationError(LcxError, ValueError):
    """An engine or scenario configuration is inconsistent."""


class CalibrationError(LcxError):
    """A measurement set cannot support the requested calibration."""


class ParseError(LcxError):
    """A document failed to parse or violates an invariant of its target type."""

    def __init__(self, path, line: int | None, reason: str):
        self.path = str(path)
        self.line = line
        self.reason = reason
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {reason}")
