"""Per-line sample values from a recorded execution.

Line events of one activation are segmented into iterations (maximal
forward runs; any non-increase in line number starts a new one).  The
cursor line picks the displayed iteration: the first iteration that covers
it.  Lines that iteration does not cover fall back to the earliest
iteration covering them, so every executed line shows a value.  A
redundancy rule keeps repeated unchanged reads from cluttering the view;
writes always show.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import StaleTrace
from .model import (
    Access,
    Activation,
    BindPayload,
    EventKind,
    SourceLoc,
    TraceEvent,
    TraceStore,
)


@dataclass(frozen=True)
class Iteration:
    """A maximal run of strictly increasing line numbers within one activation."""

    act: int
    index: int  # 1-based within the activation
    line_events: tuple[int, ...]
    covered_lines: frozenset[int]
    first_seq: int


@dataclass(frozen=True)
class AnnotationEntry:
    var: str
    repr: str
    access: Access


@dataclass(frozen=True)
class LineAnnotation:
    loc: SourceLoc
    entries: tuple[AnnotationEntry, ...]
    iteration: tuple[int, int]  # (act, iteration index)


@dataclass(frozen=True)
class CursorContext:
    """The file and line the reader is looking at."""

    file: str
    cursor_line: int

    def __post_init__(self) -> None:
        if self.cursor_line < 1:
            raise ValueError("cursor_line must be >= 1")


def segment_iterations(store: TraceStore, activation: Activation) -> list[Iteration]:
    """Split an activation's own line events at every non-increase in line number.

    Equal line numbers count as a backward jump: a single-line loop body
    produces one iteration per pass.
    """
    iterations: list[Iteration] = []
    current: list[TraceEvent] = []

    def close() -> None:
        if current:
            iterations.append(Iteration(
                act=activation.act,
                index=len(iterations) + 1,
                line_events=tuple(e.seq for e in current),
                covered_lines=frozenset(e.loc.line for e in current),
                first_seq=current[0].seq,
            ))

    prev_line: int | None = None
    for event in store.own_line_events(activation.act):
        if prev_line is not None and event.loc.line <= prev_line:
            close()
            current = []
        current.append(event)
        prev_line = event.loc.line
    close()
    return iterations


def _binds_by_iteration(
    store: TraceStore, activation: Activation, iterations: Sequence[Iteration]
) -> dict[int, list[TraceEvent]]:
    """Assign each own bind event to the iteration whose span contains it.

    Binds for a line are emitted after that line's event, so a bind belongs
    to the iteration of the last line event at or before it.  Binds that
    precede every line event have no line to decorate and are dropped.
    """
    by_index: dict[int, list[TraceEvent]] = {it.index: [] for it in iterations}
    if not iterations:
        return by_index
    starts = [it.first_seq for it in iterations]
    slot = 0
    for event in store.own_bind_events(activation.act):
        if event.seq < starts[0]:
            continue
        while slot + 1 < len(starts) and event.seq >= starts[slot + 1]:
            slot += 1
        by_index[iterations[slot].index].append(event)
    return by_index


class _FileIterations:
    """All iterations of all activations touching one file, plus their binds."""

    def __init__(self, store: TraceStore, file: str):
        self.iterations: list[Iteration] = []
        self.binds: dict[tuple[int, int], list[TraceEvent]] = {}
        for activation in store.activations_for_file(file):
            its = segment_iterations(store, activation)
            self.iterations.extend(its)
            for index, events in _binds_by_iteration(store, activation, its).items():
                self.binds[(activation.act, index)] = events

    def covering(self, line: int) -> Iteration | None:
        candidates = [it for it in self.iterations if line in it.covered_lines]
        if not candidates:
            return None
        return min(candidates, key=lambda it: it.first_seq)


def select_iteration(
    store: TraceStore, ctx: CursorContext, allow_stale: bool = False
) -> Iteration | None:
    """The first iteration (smallest first seq) covering the cursor line."""
    if store.stale and not allow_stale:
        raise StaleTrace("trace was invalidated by a source edit")
    return _FileIterations(store, ctx.file).covering(ctx.cursor_line)


def redundancy_filter(annotations: Sequence[LineAnnotation]) -> list[LineAnnotation]:
    """Drop repeated unchanged reads within one iteration's annotations.

    An entry is suppressed when the same (var, value) pair already appears
    on an earlier line of the iteration and this occurrence is a read.
    Writes are always kept: a re-appearing value that was just assigned is
    state information, not noise.
    """
    seen: set[tuple[str, str]] = set()
    out: list[LineAnnotation] = []
    for annotation in sorted(annotations, key=lambda a: a.loc.line):
        kept = tuple(
            entry for entry in annotation.entries
            if not (entry.access is Access.READ and (entry.var, entry.repr) in seen)
        )
        seen.update((entry.var, entry.repr) for entry in kept)
        out.append(LineAnnotation(loc=annotation.loc, entries=kept,
                                  iteration=annotation.iteration))
    return out


def _entries_on_line(binds: Iterable[TraceEvent], line: int) -> tuple[AnnotationEntry, ...]:
    """One entry per variable bound on the line: last value, ordered by first bind.

    A variable written anywhere on the line counts as written, even if it
    was also read there.
    """
    first_seq: dict[str, int] = {}
    last_repr: dict[str, str] = {}
    wrote: set[str] = set()
    for event in binds:
        if event.loc.line != line:
            continue
        assert isinstance(event.payload, BindPayload)
        var = event.payload.var
        first_seq.setdefault(var, event.seq)
        last_repr[var] = event.payload.repr
        if event.payload.access is Access.WRITE:
            wrote.add(var)
    ordered = sorted(first_seq, key=first_seq.__getitem__)
    return tuple(
        AnnotationEntry(
            var=var,
            repr=last_repr[var],
            access=Access.WRITE if var in wrote else Access.READ,
        )
        for var in ordered
    )


def annotate_file(
    store: TraceStore, ctx: CursorContext, allow_stale: bool = False
) -> list[LineAnnotation]:
    """Annotations for every executed line of the cursor's file.

    Lines covered by the cursor's iteration take their values from it; the
    rest fall back per line to the earliest covering iteration.  The
    redundancy filter runs per iteration, and the result is sorted by line.
    """
    if store.stale and not allow_stale:
        raise StaleTrace("trace was invalidated by a source edit")
    lines = store.executed_lines(ctx.file)
    if not lines:
        return []
    per_file = _FileIterations(store, ctx.file)
    preferred = per_file.covering(ctx.cursor_line)

    raw: list[LineAnnotation] = []
    for line in lines:
        if preferred is not None and line in preferred.covered_lines:
            iteration = preferred
        else:
            iteration = per_file.covering(line)
            if iteration is None:
                continue  # executed in another activation shape; nothing to show
        key = (iteration.act, iteration.index)
        raw.append(LineAnnotation(
            loc=SourceLoc(file=ctx.file, line=line),
            entries=_entries_on_line(per_file.binds.get(key, ()), line),
            iteration=key,
        ))

    by_iteration: dict[tuple[int, int], list[LineAnnotation]] = {}
    for annotation in raw:
        by_iteration.setdefault(annotation.iteration, []).append(annotation)
    filtered: list[LineAnnotation] = []
    for group in by_iteration.values():
        filtered.extend(redundancy_filter(group))
    return sorted(filtered, key=lambda a: a.loc.line)


def on_edit(store: TraceStore, file: str | None = None) -> None:
    """Invalidate the whole store on any edit; per-file granularity is not kept."""
    del file
    store.mark_stale()


# --------------------------------------------------------------------------
# Output formats
# --------------------------------------------------------------------------

def annotations_to_payload(annotations: Iterable[LineAnnotation]) -> list[dict]:
    return [
        {
            "file": a.loc.file,
            "line": a.loc.line,
            "iteration": {"act": a.iteration[0], "index": a.iteration[1]},
            "entries": [
                {"var": e.var, "repr": e.repr, "access": e.access.value}
                for e in a.entries
            ],
        }
        for a in annotations
    ]


def render_annotated_source(source_text: str, annotations: Iterable[LineAnnotation]) -> str:
    """Source text with ``  // var = repr, var2 = repr2`` suffixes on annotated lines."""
    suffixes: dict[int, str] = {}
    for annotation in annotations:
        if not annotation.entries:
            continue
        suffixes[annotation.loc.line] = ", ".join(
            f"{e.var} = {e.repr}" for e in annotation.entries
        )
    out = []
    for i, line in enumerate(source_text.splitlines(), start=1):
        if i in suffixes:
            out.append(f"{line}  // {suffixes[i]}")
        else:
            out.append(line)
    return "\n".join(out) + "\n"
