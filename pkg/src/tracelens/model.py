"""Trace event vocabulary, the JSONL wire format, and the indexed immutable store.

A trace is a UTF-8 file of one JSON object per line, ordered by a global
sequence number.  Ingestion groups events into activations (one method
invocation each, from its call event to its return or exception) and builds
per-file indexes.  After ingestion the store never mutates, with one
exception: the monotonic ``stale`` flag, which records that the underlying
sources were edited and trace-derived data should no longer be trusted.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import MalformedRecord, NonMonotonicSeq, OrphanEvent, UnknownActivation


class EventKind(str, Enum):
    CALL = "call"
    RETURN = "return"
    EXCEPTION = "exception"
    LINE = "line"
    BIND = "bind"


class Access(str, Enum):
    READ = "read"
    WRITE = "write"


@dataclass(frozen=True)
class SourceLoc:
    """A 1-based line in a relative, forward-slash file path."""

    file: str
    line: int


@dataclass(frozen=True)
class ArgValue:
    name: str
    repr: str
    is_string: bool


@dataclass(frozen=True)
class ReturnValue:
    repr: str
    is_string: bool


@dataclass(frozen=True)
class CallPayload:
    args: tuple[ArgValue, ...]
    recv_before: str | None


@dataclass(frozen=True)
class ReturnPayload:
    ret: ReturnValue | None
    recv_after: str | None


@dataclass(frozen=True)
class ExceptionPayload:
    exc_type: str
    msg: str


@dataclass(frozen=True)
class BindPayload:
    """One observed value of a variable at the completion of a source line."""

    var: str
    repr: str
    is_string: bool
    access: Access


Payload = CallPayload | ReturnPayload | ExceptionPayload | BindPayload


@dataclass(frozen=True)
class TraceEvent:
    """One observed runtime fact, positioned by a globally unique seq."""

    seq: int
    kind: EventKind
    thread: str
    act: int
    loc: SourceLoc
    method: str | None
    payload: Payload | None  # None for line events


@dataclass(frozen=True)
class Activation:
    """One invocation of a method: call event through return or exception.

    ``own_events`` lists only the line/bind events of this invocation
    itself; events of nested calls belong to their own activations.  An
    activation with no closing event (program ended mid-call) is kept and
    flagged truncated rather than rejected.
    """

    act: int
    method: str
    thread: str
    file: str
    call_seq: int
    close_seq: int | None
    own_events: tuple[int, ...]

    @property
    def truncated(self) -> bool:
        return self.close_seq is None


# --------------------------------------------------------------------------
# Wire format
# --------------------------------------------------------------------------

def _byte_offset(line: str, char_pos: int) -> int:
    return len(line[:char_pos].encode("utf-8"))


def _field_offset(line: str, field: str) -> int:
    """Best-effort byte offset of a field's key inside the raw record."""
    key = '"%s"' % field.rsplit(".", 1)[-1]
    pos = line.find(key)
    return _byte_offset(line, pos) if pos >= 0 else 0


def _get(raw: dict[str, Any], field: str, kind: type | tuple[type, ...], line: str) -> Any:
    if field not in raw:
        raise MalformedRecord(f"missing field {field!r}", field=field)
    value = raw[field]
    # bool is an int subclass; an int field holding true/false is still wrong.
    if isinstance(value, bool) and kind is not bool:
        raise MalformedRecord(
            f"field {field!r} has wrong type bool",
            field=field,
            offset=_field_offset(line, field),
        )
    if not isinstance(value, kind):
        raise MalformedRecord(
            f"field {field!r} has wrong type {type(value).__name__}",
            field=field,
            offset=_field_offset(line, field),
        )
    return value


def _get_positive_int(raw: dict[str, Any], field: str, line: str) -> int:
    value = _get(raw, field, int, line)
    if value <= 0:
        raise MalformedRecord(
            f"field {field!r} must be positive, got {value}",
            field=field,
            offset=_field_offset(line, field),
        )
    return value


def _parse_loc(raw: dict[str, Any], line: str) -> SourceLoc:
    loc = _get(raw, "loc", dict, line)
    file = _get(loc, "file", str, line)
    if not file:
        raise MalformedRecord("field 'loc.file' is empty", field="loc.file",
                              offset=_field_offset(line, "file"))
    if "\\" in file:
        raise MalformedRecord(
            "field 'loc.file' must use forward slashes",
            field="loc.file",
            offset=_field_offset(line, "file"),
        )
    line_no = _get_positive_int(loc, "line", line)
    return SourceLoc(file=file, line=line_no)


def _parse_args(raw: dict[str, Any], line: str) -> tuple[ArgValue, ...]:
    entries = _get(raw, "args", list, line)
    args = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise MalformedRecord(
                f"field 'args[{i}]' must be an object",
                field=f"args[{i}]",
                offset=_field_offset(line, "args"),
            )
        args.append(ArgValue(
            name=_get(entry, "name", str, line),
            repr=_get(entry, "repr", str, line),
            is_string=_get(entry, "is_string", bool, line),
        ))
    return tuple(args)


def _parse_optional_str(raw: dict[str, Any], field: str, line: str) -> str | None:
    value = _get(raw, field, (str, type(None)), line)
    return value


def parse_event(line: str) -> TraceEvent:
    """Decode one trace record; raises MalformedRecord pointing at the fault."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(
            f"bad JSON syntax: {exc.msg}", offset=_byte_offset(line, exc.pos)
        ) from exc
    if not isinstance(raw, dict):
        raise MalformedRecord("record is not a JSON object")

    seq = _get_positive_int(raw, "seq", line)
    kind_text = _get(raw, "kind", str, line)
    try:
        kind = EventKind(kind_text)
    except ValueError:
        raise MalformedRecord(
            f"unknown kind {kind_text!r}", field="kind",
            offset=_field_offset(line, "kind"),
        ) from None
    thread = _get(raw, "thread", str, line)
    act = _get_positive_int(raw, "act", line)
    loc = _parse_loc(raw, line)

    method: str | None
    if kind in (EventKind.CALL, EventKind.RETURN, EventKind.EXCEPTION):
        method = _get(raw, "method", str, line)
    else:
        method = raw.get("method") if isinstance(raw.get("method"), str) else None

    payload: Payload | None
    if kind is EventKind.CALL:
        payload = CallPayload(
            args=_parse_args(raw, line),
            recv_before=_parse_optional_str(raw, "recv_before", line),
        )
    elif kind is EventKind.RETURN:
        raw_ret = _get(raw, "ret", (dict, type(None)), line)
        ret = None
        if raw_ret is not None:
            ret = ReturnValue(
                repr=_get(raw_ret, "repr", str, line),
                is_string=_get(raw_ret, "is_string", bool, line),
            )
        payload = ReturnPayload(
            ret=ret, recv_after=_parse_optional_str(raw, "recv_after", line)
        )
    elif kind is EventKind.EXCEPTION:
        payload = ExceptionPayload(
            exc_type=_get(raw, "exc_type", str, line),
            msg=_get(raw, "msg", str, line),
        )
    elif kind is EventKind.BIND:
        access_text = _get(raw, "access", str, line)
        try:
            access = Access(access_text)
        except ValueError:
            raise MalformedRecord(
                f"unknown access {access_text!r}", field="access",
                offset=_field_offset(line, "access"),
            ) from None
        payload = BindPayload(
            var=_get(raw, "var", str, line),
            repr=_get(raw, "repr", str, line),
            is_string=_get(raw, "is_string", bool, line),
            access=access,
        )
    else:
        payload = None

    return TraceEvent(
        seq=seq, kind=kind, thread=thread, act=act, loc=loc,
        method=method, payload=payload,
    )


def serialize_event(event: TraceEvent) -> str:
    """Encode an event as one canonical JSONL record (stable key order)."""
    record: dict[str, Any] = {
        "seq": event.seq,
        "kind": event.kind.value,
        "thread": event.thread,
        "act": event.act,
        "loc": {"file": event.loc.file, "line": event.loc.line},
    }
    if event.method is not None:
        record["method"] = event.method
    payload = event.payload
    if isinstance(payload, CallPayload):
        record["args"] = [
            {"name": a.name, "repr": a.repr, "is_string": a.is_string}
            for a in payload.args
        ]
        record["recv_before"] = payload.recv_before
    elif isinstance(payload, ReturnPayload):
        record["ret"] = (
            None if payload.ret is None
            else {"repr": payload.ret.repr, "is_string": payload.ret.is_string}
        )
        record["recv_after"] = payload.recv_after
    elif isinstance(payload, ExceptionPayload):
        record["exc_type"] = payload.exc_type
        record["msg"] = payload.msg
    elif isinstance(payload, BindPayload):
        record["var"] = payload.var
        record["repr"] = payload.repr
        record["is_string"] = payload.is_string
        record["access"] = payload.access.value
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


# --------------------------------------------------------------------------
# Store
# --------------------------------------------------------------------------

class TraceStore:
    """Seq-ordered events plus activation and per-file indexes.

    Immutable after construction except for :meth:`mark_stale`, which only
    ever flips ``stale`` from False to True and is safe to call while other
    threads read.
    """

    def __init__(self, events: tuple[TraceEvent, ...], activations: dict[int, Activation]):
        self._events = events
        self._activations = dict(activations)
        self._index_of = {e.seq: i for i, e in enumerate(events)}
        self._file_lines: dict[str, tuple[int, ...]] = {}
        self._file_acts: dict[str, tuple[int, ...]] = {}
        self._stale = False
        self._build_indexes()

    def _build_indexes(self) -> None:
        lines: dict[str, set[int]] = {}
        acts: dict[str, list[int]] = {}
        for event in self._events:
            if event.kind is EventKind.LINE:
                lines.setdefault(event.loc.file, set()).add(event.loc.line)
        for activation in self._activations.values():  # insertion = call order
            touched: set[str] = set()
            for seq in activation.own_events:
                event = self.event(seq)
                if event.kind is EventKind.LINE:
                    touched.add(event.loc.file)
            for file in touched:
                acts.setdefault(file, []).append(activation.act)
        self._file_lines = {f: tuple(sorted(ls)) for f, ls in lines.items()}
        self._file_acts = {f: tuple(a) for f, a in acts.items()}

    @property
    def events(self) -> tuple[TraceEvent, ...]:
        return self._events

    @property
    def activations(self) -> dict[int, Activation]:
        return dict(self._activations)

    @property
    def stale(self) -> bool:
        return self._stale

    def mark_stale(self) -> None:
        """Invalidate trace-derived data after a source edit. Idempotent."""
        self._stale = True

    def event(self, seq: int) -> TraceEvent:
        return self._events[self._index_of[seq]]

    def activation(self, act: int) -> Activation:
        try:
            return self._activations[act]
        except KeyError:
            raise UnknownActivation(f"unknown activation {act}") from None

    def files(self) -> tuple[str, ...]:
        """Files with at least one executed line, sorted."""
        return tuple(sorted(self._file_lines))

    def executed_lines(self, file: str) -> tuple[int, ...]:
        return self._file_lines.get(file, ())

    def activations_for_file(self, file: str) -> tuple[Activation, ...]:
        """Activations whose own line events touch ``file``, in call order."""
        return tuple(self._activations[a] for a in self._file_acts.get(file, ()))

    def own_line_events(self, act: int) -> Iterator[TraceEvent]:
        for seq in self.activation(act).own_events:
            event = self.event(seq)
            if event.kind is EventKind.LINE:
                yield event

    def own_bind_events(self, act: int) -> Iterator[TraceEvent]:
        for seq in self.activation(act).own_events:
            event = self.event(seq)
            if event.kind is EventKind.BIND:
                yield event

    def digest(self) -> str:
        """Content hash over the canonical serialization of all events."""
        h = hashlib.sha256()
        for event in self._events:
            h.update(serialize_event(event).encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()

    def verify(self) -> list[str]:
        """Check structural invariants; returns human-readable violations.

        Re-derives the activation assignment with a per-thread call stack
        and compares it with the stored one, so a correct ingest and a
        consistent trace both come out clean.
        """
        problems: list[str] = []
        stacks: dict[str, list[int]] = {}
        rescan: dict[int, list[int]] = {a: [] for a in self._activations}
        for event in self._events:
            stack = stacks.setdefault(event.thread, [])
            if event.kind is EventKind.CALL:
                stack.append(event.act)
            elif event.kind in (EventKind.RETURN, EventKind.EXCEPTION):
                if not stack or stack[-1] != event.act:
                    problems.append(
                        f"seq {event.seq}: close of act {event.act} does not match "
                        f"innermost open activation"
                    )
                else:
                    stack.pop()
            else:
                if not stack or stack[-1] != event.act:
                    problems.append(
                        f"seq {event.seq}: {event.kind.value} event of act {event.act} "
                        f"is not in the innermost open activation"
                    )
                if stack:
                    rescan.setdefault(stack[-1], []).append(event.seq)
        for act, activation in self._activations.items():
            if list(activation.own_events) != rescan.get(act, []):
                problems.append(f"act {act}: own-event list disagrees with stack re-scan")
            for event in self.own_line_events(act):
                if event.loc.file != activation.file:
                    problems.append(
                        f"act {act}: line event at seq {event.seq} is in "
                        f"{event.loc.file!r}, not the activation's file {activation.file!r}"
                    )
            close = activation.close_seq
            for seq in activation.own_events:
                if seq <= activation.call_seq or (close is not None and seq >= close):
                    problems.append(f"act {act}: own event {seq} outside activation interval")
        return problems


def ingest(lines: Iterable[str]) -> TraceStore:
    """Build a store from trace records ordered by seq.

    Line and bind events are attached to the activation named by their
    ``act`` field, so nested calls never pollute the caller's own-event
    list.  Activations without a closing event are kept as truncated.
    """
    events: list[TraceEvent] = []
    builders: dict[int, dict[str, Any]] = {}
    last_seq = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            event = parse_event(line)
        except MalformedRecord as err:
            err.line_no = line_no
            raise
        if event.seq <= last_seq:
            raise NonMonotonicSeq(
                f"line {line_no}: seq {event.seq} does not increase past {last_seq}",
                line_no=line_no,
            )
        last_seq = event.seq
        if event.kind is EventKind.CALL:
            if event.act in builders:
                raise MalformedRecord(
                    f"activation id {event.act} reused by a second call",
                    field="act", line_no=line_no,
                )
            builders[event.act] = {
                "act": event.act,
                "method": event.method,
                "thread": event.thread,
                "file": event.loc.file,
                "call_seq": event.seq,
                "close_seq": None,
                "own": [],
            }
        else:
            builder = builders.get(event.act)
            if builder is None:
                raise OrphanEvent(
                    f"line {line_no}: {event.kind.value} event for act {event.act} "
                    f"with no prior call",
                    line_no=line_no,
                )
            if builder["close_seq"] is not None:
                raise OrphanEvent(
                    f"line {line_no}: {event.kind.value} event for act {event.act} "
                    f"after it closed",
                    line_no=line_no,
                )
            if event.kind in (EventKind.RETURN, EventKind.EXCEPTION):
                builder["close_seq"] = event.seq
            else:
                builder["own"].append(event.seq)
        events.append(event)

    activations = {
        act: Activation(
            act=b["act"], method=b["method"], thread=b["thread"], file=b["file"],
            call_seq=b["call_seq"], close_seq=b["close_seq"],
            own_events=tuple(b["own"]),
        )
        for act, b in builders.items()
    }
    return TraceStore(tuple(events), activations)


def load_trace(path: str | Path) -> TraceStore:
    """Ingest a trace file from disk."""
    with open(path, encoding="utf-8") as f:
        return ingest(f)
