"""Example-based method documentation from observed calls.

Each completed activation is folded into a call record (arguments, return,
receiver state before/after, or the thrown exception type), classified
against a small decision table, and rendered as one documentation sentence.
Sentences are deduplicated per method and capped, preferring one example of
each behavior kind over more variants of the same kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping

from .errors import MalformedRecord, MissingSource
from .model import CallPayload, EventKind, ExceptionPayload, ReturnPayload, TraceStore

DEFAULT_CONSTRUCTOR_MARKER = "<init>"
DEFAULT_SENTENCE_CAP = 3


@dataclass(frozen=True)
class MethodCallRecord:
    """Digest of one observed call; ``ret`` and ``exc_type`` never coexist."""

    method: str
    args: tuple[tuple[str, str], ...]  # (name, repr), declaration order
    recv_before: str | None
    recv_after: str | None
    ret: str | None
    exc_type: str | None
    act: int


class TemplateKind(Enum):
    THREW = "threw"
    RETURNED_AND_CHANGED = "returned_and_changed"
    CHANGED_ONLY = "changed_only"
    RETURNED_ONLY = "returned_only"
    NO_EFFECT = "no_effect"
    CONSTRUCTED = "constructed"


@dataclass(frozen=True)
class DocEntry:
    method: str
    sentences: tuple[str, ...]
    example_count: int
    distinct_count: int


def collect_records(store: TraceStore) -> list[MethodCallRecord]:
    """One record per closed activation, in call order; truncated ones are skipped."""
    records: list[MethodCallRecord] = []
    for activation in store.activations.values():
        if activation.close_seq is None:
            continue
        call = store.event(activation.call_seq)
        close = store.event(activation.close_seq)
        assert isinstance(call.payload, CallPayload)
        args = tuple((a.name, a.repr) for a in call.payload.args)
        recv_before = call.payload.recv_before
        recv_after = None
        ret = None
        exc_type = None
        if close.kind is EventKind.RETURN:
            assert isinstance(close.payload, ReturnPayload)
            recv_after = close.payload.recv_after
            if close.payload.ret is not None:
                ret = close.payload.ret.repr
        else:
            assert isinstance(close.payload, ExceptionPayload)
            exc_type = close.payload.exc_type
        records.append(MethodCallRecord(
            method=activation.method,
            args=args,
            recv_before=recv_before,
            recv_after=recv_after,
            ret=ret,
            exc_type=exc_type,
            act=activation.act,
        ))
    return records


def classify(
    record: MethodCallRecord,
    constructor_marker: str = DEFAULT_CONSTRUCTOR_MARKER,
) -> TemplateKind:
    """Total, unambiguous classification of a record.

    A thrown exception dominates everything; otherwise constructors are
    recognized by the final name segment, and the rest falls out of whether
    the receiver's representation changed and whether a value was returned.
    """
    if record.exc_type is not None:
        return TemplateKind.THREW
    if record.method.rsplit(".", 1)[-1] == constructor_marker:
        return TemplateKind.CONSTRUCTED
    state_changed = (
        record.recv_before is not None
        and record.recv_after is not None
        and record.recv_before != record.recv_after
    )
    returned = record.ret is not None
    if state_changed and returned:
        return TemplateKind.RETURNED_AND_CHANGED
    if state_changed:
        return TemplateKind.CHANGED_ONLY
    if returned:
        return TemplateKind.RETURNED_ONLY
    return TemplateKind.NO_EFFECT


def render_sentence(
    record: MethodCallRecord,
    constructor_marker: str = DEFAULT_CONSTRUCTOR_MARKER,
) -> str:
    """One documentation sentence for a record.

    The receiver clause ("on X") appears only when the receiver state
    before the call is known; the arguments clause only when there are
    arguments.  Constructors open with "When constructed" and have no
    receiver clause.
    """
    kind = classify(record, constructor_marker)
    args_clause = ""
    if record.args:
        args_clause = " with arguments (%s)" % ", ".join(r for _, r in record.args)

    if kind is TemplateKind.CONSTRUCTED:
        became = record.recv_after if record.recv_after is not None else "<unknown>"
        return f"When constructed{args_clause}, the object became {became}."

    opening = "When called"
    if record.recv_before is not None:
        opening += f" on {record.recv_before}"
    opening += args_clause

    if kind is TemplateKind.THREW:
        body = f"the method threw {record.exc_type}"
    elif kind is TemplateKind.RETURNED_AND_CHANGED:
        body = (
            f"the method returned {record.ret} "
            f"and the object changed to {record.recv_after}"
        )
    elif kind is TemplateKind.CHANGED_ONLY:
        body = f"the object changed to {record.recv_after}"
    elif kind is TemplateKind.RETURNED_ONLY:
        body = f"the method returned {record.ret}"
    else:
        body = "the method completed with no observable effect"
    return f"{opening}, {body}."


def _select_sentences(
    rendered: list[tuple[str, TemplateKind]], cap: int
) -> tuple[list[str], int]:
    """Dedup in first-occurrence order, then cap, covering kinds first."""
    distinct: list[tuple[str, TemplateKind]] = []
    seen: set[str] = set()
    for sentence, kind in rendered:
        if sentence not in seen:
            seen.add(sentence)
            distinct.append((sentence, kind))
    picked: set[int] = set()
    covered: set[TemplateKind] = set()
    for i, (_, kind) in enumerate(distinct):
        if len(picked) >= cap:
            break
        if kind not in covered:
            picked.add(i)
            covered.add(kind)
    for i in range(len(distinct)):
        if len(picked) >= cap:
            break
        picked.add(i)
    return [distinct[i][0] for i in sorted(picked)], len(distinct)


def generate_docs(
    store: TraceStore,
    method_prefix: str = "",
    k: int = DEFAULT_SENTENCE_CAP,
    constructor_marker: str = DEFAULT_CONSTRUCTOR_MARKER,
) -> list[DocEntry]:
    """Documentation entries for every method with at least one closed call.

    Entries are sorted by method name and hold at most ``k`` distinct
    sentences each.  Output is a pure function of the store contents.
    """
    if k < 1:
        raise ValueError("sentence cap must be at least 1")
    by_method: dict[str, list[MethodCallRecord]] = {}
    for record in collect_records(store):
        if not record.method.startswith(method_prefix):
            continue
        by_method.setdefault(record.method, []).append(record)
    entries = []
    for method in sorted(by_method):
        records = by_method[method]
        rendered = [
            (render_sentence(r, constructor_marker), classify(r, constructor_marker))
            for r in records
        ]
        sentences, distinct_count = _select_sentences(rendered, k)
        entries.append(DocEntry(
            method=method,
            sentences=tuple(sentences),
            example_count=len(records),
            distinct_count=distinct_count,
        ))
    return entries


# --------------------------------------------------------------------------
# Output formats
# --------------------------------------------------------------------------

def docs_to_payload(entries: Iterable[DocEntry]) -> list[dict]:
    return [
        {
            "method": e.method,
            "sentences": list(e.sentences),
            "example_count": e.example_count,
            "distinct_count": e.distinct_count,
        }
        for e in entries
    ]


def render_docs_text(entries: Iterable[DocEntry]) -> str:
    """Plain-text documentation: one block per method."""
    blocks = []
    for entry in entries:
        lines = [entry.method]
        lines.extend(f"  {s}" for s in entry.sentences)
        lines.append(
            f"  ({entry.example_count} call(s) observed, "
            f"{entry.distinct_count} distinct sentence(s))"
        )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


# --------------------------------------------------------------------------
# Succinctness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MethodSpan:
    file: str
    start_line: int
    end_line: int


class SourceMap:
    """Qualified method name -> source span, with access to the source text."""

    def __init__(self, spans: Mapping[str, MethodSpan], source_root: str | Path):
        self._spans = dict(spans)
        self._root = Path(source_root)

    @classmethod
    def load(cls, path: str | Path, source_root: str | Path) -> "SourceMap":
        """Read the companion map: a JSON object keyed by qualified method name,
        each value ``{"file": ..., "start_line": ..., "end_line": ...}``."""
        text = Path(path).read_text(encoding="utf-8")
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"bad source map JSON: {exc.msg}", offset=exc.pos) from exc
        if not isinstance(raw, dict):
            raise MalformedRecord("source map must be a JSON object")
        spans = {}
        for method, entry in raw.items():
            if not isinstance(entry, dict):
                raise MalformedRecord(f"source map entry for {method!r} must be an object",
                                      field=method)
            try:
                spans[method] = MethodSpan(
                    file=entry["file"],
                    start_line=int(entry["start_line"]),
                    end_line=int(entry["end_line"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(
                    f"source map entry for {method!r} is incomplete: {exc}",
                    field=method,
                ) from exc
        return cls(spans, source_root)

    def span(self, method: str) -> MethodSpan | None:
        return self._spans.get(method)

    def methods(self) -> tuple[str, ...]:
        return tuple(sorted(self._spans))

    def method_body(self, method: str) -> str:
        """Source text of the method, raising MissingSource when unavailable."""
        span = self._spans.get(method)
        if span is None:
            raise MissingSource(f"method {method!r} is absent from the source map")
        path = self._root / span.file
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise MissingSource(f"cannot read source for {method!r}: {exc}") from exc
        if span.start_line < 1 or span.end_line > len(lines):
            raise MissingSource(
                f"span {span.start_line}..{span.end_line} of {method!r} is outside "
                f"{span.file} ({len(lines)} lines)"
            )
        return "\n".join(lines[span.start_line - 1:span.end_line])


def succinctness(entry: DocEntry, source_map: SourceMap) -> float:
    """Mean sentence length over whitespace-normalized method body length."""
    body = " ".join(source_map.method_body(entry.method).split())
    if not body:
        raise MissingSource(f"method {entry.method!r} has an empty body")
    return fmean(len(s) for s in entry.sentences) / len(body)


@dataclass(frozen=True)
class SuccinctnessReport:
    ratios: dict[str, float]
    missing: tuple[str, ...]
    mean: float | None


def succinctness_report(
    entries: Iterable[DocEntry], source_map: SourceMap
) -> SuccinctnessReport:
    """Per-method ratios plus the corpus mean; methods without source are listed."""
    ratios: dict[str, float] = {}
    missing: list[str] = []
    for entry in entries:
        try:
            ratios[entry.method] = succinctness(entry, source_map)
        except MissingSource:
            missing.append(entry.method)
    mean = fmean(ratios.values()) if ratios else None
    return SuccinctnessReport(ratios=ratios, missing=tuple(missing), mean=mean)


def render_succinctness_text(report: SuccinctnessReport) -> str:
    lines = [f"{method}: {ratio:.4f}" for method, ratio in sorted(report.ratios.items())]
    for method in report.missing:
        lines.append(f"{method}: no source")
    if report.mean is not None:
        lines.append(f"corpus mean: {report.mean:.4f}")
    else:
        lines.append("corpus mean: n/a")
    return "\n".join(lines) + "\n"
