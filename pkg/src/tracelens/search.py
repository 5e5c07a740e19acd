"""Substring search over string-valued runtime observations.

Every string a traced program evaluated — string variables, string call
arguments, string return values, exception messages — is a search
candidate.  A session walks candidates in event order with a resumable
cursor, the replay analogue of pausing a live program at each hit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fnmatch import fnmatchcase

from .errors import EmptyNeedle
from .model import (
    BindPayload,
    CallPayload,
    ExceptionPayload,
    ReturnPayload,
    SourceLoc,
    TraceEvent,
    TraceStore,
)


class Origin(str, Enum):
    BIND_VAR = "bind_var"
    CALL_ARG = "call_arg"
    RETURN_VALUE = "return_value"
    EXCEPTION_MESSAGE = "exception_message"


@dataclass(frozen=True)
class SearchQuery:
    needle: str
    case_sensitive: bool = True

    def matches(self, text: str) -> bool:
        if self.case_sensitive:
            return self.needle in text
        return self.needle.casefold() in text.casefold()


@dataclass(frozen=True)
class SearchScope:
    """Restrict a search to method-name prefixes and/or file globs.

    An empty list places no constraint on that axis; both axes must admit
    an event for it to be in scope.
    """

    method_prefixes: tuple[str, ...] = ()
    file_globs: tuple[str, ...] = ()

    def admits(self, method: str, file: str) -> bool:
        if self.method_prefixes and not any(
            method.startswith(p) for p in self.method_prefixes
        ):
            return False
        if self.file_globs and not any(fnmatchcase(file, g) for g in self.file_globs):
            return False
        return True


@dataclass(frozen=True)
class Candidate:
    """One searchable string, positioned by (event seq, within-event index)."""

    seq: int
    index: int
    origin: Origin
    label: str
    text: str


@dataclass(frozen=True)
class SearchMatch:
    candidate: Candidate
    loc: SourceLoc
    method: str
    act: int
    frame_locals: tuple[tuple[str, str], ...]
    stale: bool


def candidates_of(event: TraceEvent) -> list[Candidate]:
    """Searchable strings of one event, in within-event order.

    Only payload fields flagged ``is_string`` yield candidates; exception
    messages are always text and always eligible.  Call arguments come in
    declaration order.  Line events carry no values.
    """
    payload = event.payload
    out: list[Candidate] = []
    if isinstance(payload, CallPayload):
        for arg in payload.args:
            if arg.is_string:
                out.append(Candidate(
                    seq=event.seq, index=len(out), origin=Origin.CALL_ARG,
                    label=arg.name, text=arg.repr,
                ))
    elif isinstance(payload, ReturnPayload):
        if payload.ret is not None and payload.ret.is_string:
            out.append(Candidate(
                seq=event.seq, index=0, origin=Origin.RETURN_VALUE,
                label=event.method or "", text=payload.ret.repr,
            ))
    elif isinstance(payload, ExceptionPayload):
        out.append(Candidate(
            seq=event.seq, index=0, origin=Origin.EXCEPTION_MESSAGE,
            label=payload.exc_type, text=payload.msg,
        ))
    elif isinstance(payload, BindPayload):
        if payload.is_string:
            out.append(Candidate(
                seq=event.seq, index=0, origin=Origin.BIND_VAR,
                label=payload.var, text=payload.repr,
            ))
    return out


def frame_locals_at(store: TraceStore, act: int, seq: int) -> list[tuple[str, str]]:
    """Latest value of each variable bound in ``act`` up to and including ``seq``.

    Sorted by variable name; raises UnknownActivation for a bad act id.
    """
    latest: dict[str, str] = {}
    for event in store.own_bind_events(act):
        if event.seq > seq:
            break
        assert isinstance(event.payload, BindPayload)
        latest[event.payload.var] = event.payload.repr
    return sorted(latest.items())


class SearchSession:
    """A resumable cursor over all in-scope matching candidates.

    Single-owner: one session must not be driven from two threads at once,
    but any number of sessions may read one store concurrently.  Searching
    a stale store is allowed; matches carry the flag.
    """

    def __init__(
        self,
        store: TraceStore,
        query: SearchQuery,
        scope: SearchScope | None = None,
        *,
        include_exception_text: bool = True,
    ):
        self._store = store
        self.query = query
        self.scope = scope or SearchScope()
        self.include_exception_text = include_exception_text
        self._pos = 0  # index into store.events of the next event to inspect
        self._last = (0, -1)  # (seq, within-event index) of the last match

    @property
    def cursor(self) -> int:
        """Seq of the last returned match (0 before the first find)."""
        return self._last[0]

    @property
    def stale(self) -> bool:
        return self._store.stale

    def _method_of(self, event: TraceEvent) -> str:
        if event.method is not None:
            return event.method
        return self._store.activation(event.act).method

    def find_next(self) -> SearchMatch | None:
        """Next match past the cursor, or None once candidates are exhausted."""
        events = self._store.events
        while self._pos < len(events):
            event = events[self._pos]
            for cand in candidates_of(event):
                if (cand.seq, cand.index) <= self._last:
                    continue
                if cand.origin is Origin.EXCEPTION_MESSAGE and not self.include_exception_text:
                    continue
                if not self.scope.admits(self._method_of(event), event.loc.file):
                    continue
                if not self.query.matches(cand.text):
                    continue
                self._last = (cand.seq, cand.index)
                return SearchMatch(
                    candidate=cand,
                    loc=event.loc,
                    method=self._method_of(event),
                    act=event.act,
                    frame_locals=tuple(frame_locals_at(self._store, event.act, event.seq)),
                    stale=self._store.stale,
                )
            self._pos += 1
        return None


def open_session(
    store: TraceStore,
    query: SearchQuery,
    scope: SearchScope | None = None,
    *,
    include_exception_text: bool = True,
) -> SearchSession:
    """Start a search; rejects an empty needle."""
    if not query.needle:
        raise EmptyNeedle("search needle must be non-empty")
    return SearchSession(
        store, query, scope, include_exception_text=include_exception_text
    )
