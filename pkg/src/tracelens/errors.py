"""Exception types shared across the toolkit."""

from __future__ import annotations


class TraceLensError(Exception):
    """Base class for all tracelens errors."""


class MalformedRecord(TraceLensError):
    """A trace record (or companion file) violates the wire format.

    Carries enough context to point at the problem: the offending field
    name (when one can be named), the byte offset inside the record where
    the problem was detected, and the 1-based line number once known.
    """

    def __init__(
        self,
        message: str,
        *,
        field: str | None = None,
        offset: int = 0,
        line_no: int | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.field = field
        self.offset = offset
        self.line_no = line_no

    def __str__(self) -> str:
        where = []
        if self.line_no is not None:
            where.append(f"line {self.line_no}")
        where.append(f"byte {self.offset}")
        if self.field is not None:
            where.append(f"field {self.field!r}")
        return f"{self.message} ({', '.join(where)})"


class NonMonotonicSeq(TraceLensError):
    """Event sequence numbers are not strictly increasing in file order."""

    def __init__(self, message: str, *, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no


class OrphanEvent(TraceLensError):
    """An event references an activation with no (open) prior call."""

    def __init__(self, message: str, *, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no


class StaleTrace(TraceLensError):
    """A staleness-sensitive query ran against an invalidated trace."""


class EmptyNeedle(TraceLensError):
    """A search was opened with an empty needle."""


class UnknownActivation(TraceLensError):
    """An activation id is absent from the store."""


class MissingSource(TraceLensError):
    """A method's source span is unavailable for the requested metric."""
