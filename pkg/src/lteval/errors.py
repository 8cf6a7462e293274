"""Exception types shared across the toolkit."""

from __future__ import annotations


class LtEvalError(Exception):
    """Base class for all toolkit errors."""


class ParseError(LtEvalError, ValueError):
    """A malformed line in an annotation, result or timing file."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}"
        if line is not None:
            where += f"{':' if where else 'line '}{line}"
        super().__init__(f"{where}: {message}" if where else message)


class AlignmentError(LtEvalError, ValueError):
    """Tracker output does not line up with the ground truth it is scored against."""
