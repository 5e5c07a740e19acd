"""Iteration segmentation, cursor-driven selection, and redundancy filtering."""

from __future__ import annotations

import random
from pathlib import Path

import pytest
from builders import TraceBuilder
from hypothesis import given
from hypothesis import strategies as st
from oracles import split_iterations

from tracelens.annotate import (
    CursorContext,
    LineAnnotation,
    annotate_file,
    annotations_to_payload,
    on_edit,
    redundancy_filter,
    render_annotated_source,
    segment_iterations,
    select_iteration,
)
from tracelens.errors import StaleTrace
from tracelens.model import Access, SourceLoc, ingest, load_trace
from tracelens.search import SearchQuery, open_session


def activation_with_lines(line_numbers) -> tuple:
    b = TraceBuilder()
    act = b.call("A.f", "a.x", 1)
    for n in line_numbers:
        b.line(act, n)
    b.ret(act, 99)
    store = ingest(b.lines())
    return store, store.activation(act)


def loop_trace() -> tuple:
    """The bundled 30-event loop demo: three passes over a loop body."""
    store = load_trace(Path(__file__).parent / "fixtures" / "loop_demo.jsonl")
    (act,) = store.activations
    return store, act


def entries_as_tuples(annotation: LineAnnotation):
    return [(e.var, e.repr, e.access.value) for e in annotation.entries]


class TestSegmentIterations:
    def test_straight_line_single_iteration(self):
        store, activation = activation_with_lines([2, 3, 4])
        (only,) = segment_iterations(store, activation)
        assert only.index == 1
        assert only.covered_lines == {2, 3, 4}

    def test_backward_jump_splits(self):
        store, activation = activation_with_lines([5, 6, 5, 6, 5, 6])
        iterations = segment_iterations(store, activation)
        assert len(iterations) == 3
        assert all(it.covered_lines == {5, 6} for it in iterations)

    def test_equal_line_counts_as_backward_jump(self):
        store, activation = activation_with_lines([4, 4, 4])
        assert len(segment_iterations(store, activation)) == 3

    def test_random_sequences_match_split_oracle(self):
        rng = random.Random(71)
        for _ in range(200):
            lines = [rng.randrange(1, 12) for _ in range(rng.randrange(0, 30))]
            store, activation = activation_with_lines(lines)
            iterations = segment_iterations(store, activation)
            got = [
                [store.event(s).loc.line for s in it.line_events]
                for it in iterations
            ]
            assert got == split_iterations(lines)

    @given(st.lists(st.integers(min_value=1, max_value=9), max_size=40))
    def test_partition_and_forward_only(self, lines):
        store, activation = activation_with_lines(lines)
        iterations = segment_iterations(store, activation)
        flattened = [s for it in iterations for s in it.line_events]
        assert flattened == [e.seq for e in store.own_line_events(activation.act)]
        assert [it.index for it in iterations] == list(range(1, len(iterations) + 1))
        for it in iterations:
            numbers = [store.event(s).loc.line for s in it.line_events]
            assert numbers == sorted(set(numbers))


class TestSelectIteration:
    def test_unexecuted_line_gives_none(self):
        store, _ = activation_with_lines([2, 3])
        assert select_iteration(store, CursorContext("a.x", 17)) is None

    def test_first_covering_iteration_wins(self):
        b = TraceBuilder()
        act = b.call("A.f", "a.x", 1)      # seq 1
        for _ in range(8):
            b.bind(act, 1, "pad", "0")     # seqs 2..9
        first_seq_1 = b.line(act, 5)       # seq 10: iteration 1 starts
        b.line(act, 6)
        for _ in range(18):
            b.bind(act, 6, "pad", "0")
        first_seq_2 = b.line(act, 5)       # seq 30: iteration 2 starts
        b.line(act, 6)
        b.ret(act, 7)
        store = ingest(b.lines())
        assert (first_seq_1, first_seq_2) == (10, 30)
        chosen = select_iteration(store, CursorContext("a.x", 5))
        assert chosen.first_seq == 10
        assert chosen.index == 1

    def test_random_cases_match_argmin_oracle(self):
        rng = random.Random(13)
        for _ in range(50):
            b = TraceBuilder()
            acts = []
            for _ in range(rng.randrange(1, 5)):
                act = b.call("A.f", "a.x", 1)
                for _ in range(rng.randrange(1, 15)):
                    b.line(act, rng.randrange(1, 10))
                b.ret(act, 99)
                acts.append(act)
            store = ingest(b.lines())
            cursor = rng.randrange(1, 10)
            every = [
                it
                for act in acts
                for it in segment_iterations(store, store.activation(act))
                if cursor in it.covered_lines
            ]
            expected = min(every, key=lambda it: it.first_seq) if every else None
            assert select_iteration(store, CursorContext("a.x", cursor)) == expected

    def test_stale_store_rejected(self):
        store, _ = activation_with_lines([2])
        store.mark_stale()
        with pytest.raises(StaleTrace):
            select_iteration(store, CursorContext("a.x", 2))
        assert select_iteration(store, CursorContext("a.x", 2), allow_stale=True)


class TestRedundancyFilter:
    def annotation(self, line, entries, iteration=(1, 1)):
        from tracelens.annotate import AnnotationEntry

        return LineAnnotation(
            loc=SourceLoc("a.x", line),
            entries=tuple(AnnotationEntry(v, r, Access(a)) for v, r, a in entries),
            iteration=iteration,
        )

    def test_unchanged_read_after_write_suppressed(self):
        result = redundancy_filter([
            self.annotation(2, [("x", "5", "write")]),
            self.annotation(3, [("x", "5", "read")]),
        ])
        assert entries_as_tuples(result[0]) == [("x", "5", "write")]
        assert entries_as_tuples(result[1]) == []

    def test_writes_always_shown(self):
        result = redundancy_filter([
            self.annotation(2, [("x", "5", "write")]),
            self.annotation(4, [("x", "6", "write")]),
        ])
        assert entries_as_tuples(result[0]) == [("x", "5", "write")]
        assert entries_as_tuples(result[1]) == [("x", "6", "write")]

    def test_first_read_kept_second_suppressed(self):
        result = redundancy_filter([
            self.annotation(3, [("x", "5", "read")]),
            self.annotation(7, [("x", "5", "read")]),
        ])
        assert entries_as_tuples(result[0]) == [("x", "5", "read")]
        assert entries_as_tuples(result[1]) == []

    def test_rewritten_same_value_still_shown(self):
        result = redundancy_filter([
            self.annotation(2, [("x", "5", "write")]),
            self.annotation(3, [("x", "5", "write")]),
        ])
        assert entries_as_tuples(result[1]) == [("x", "5", "write")]


class TestAnnotateFile:
    def test_empty_trace(self):
        assert annotate_file(ingest([]), CursorContext("a.x", 1)) == []

    def test_loop_fixture_cursor_in_first_pass(self):
        store, act = loop_trace()
        result = annotate_file(store, CursorContext("looper/scan.py", 4))
        by_line = {a.loc.line: a for a in result}
        assert sorted(by_line) == [2, 3, 4, 5, 6, 7]
        assert by_line[2].iteration == (act, 1)
        assert entries_as_tuples(by_line[2]) == [("found", "-1", "write")]
        assert entries_as_tuples(by_line[3]) == [
            ("i", "0", "write"),
            ("searchStrs", "['http://', 'https://']", "read"),
        ]
        # i = 0 repeats unchanged on line 4, so only the new values show
        assert entries_as_tuples(by_line[4]) == [
            ("s", "http://", "write"),
            ("searchStrs[i]", "http://", "read"),
        ]
        assert entries_as_tuples(by_line[5]) == [
            ("text", "https://example.org", "read"),
        ]
        # lines beyond the cursor iteration fall back to the earliest cover
        assert by_line[6].iteration == (act, 2)
        assert entries_as_tuples(by_line[6]) == [("found", "1", "write")]
        assert by_line[7].iteration == (act, 3)
        assert entries_as_tuples(by_line[7]) == [("found", "1", "read")]

    def test_loop_fixture_cursor_in_second_pass(self):
        store, act = loop_trace()
        result = annotate_file(store, CursorContext("looper/scan.py", 6))
        by_line = {a.loc.line: a for a in result}
        for line in (3, 4, 5, 6):
            assert by_line[line].iteration == (act, 2)
        assert by_line[2].iteration == (act, 1)
        assert entries_as_tuples(by_line[3]) == [
            ("i", "1", "write"),
            ("searchStrs", "['http://', 'https://']", "read"),
        ]
        assert entries_as_tuples(by_line[4]) == [
            ("s", "https://", "write"),
            ("searchStrs[i]", "https://", "read"),
        ]
        assert entries_as_tuples(by_line[5]) == [
            ("text", "https://example.org", "read"),
        ]
        assert entries_as_tuples(by_line[6]) == [("found", "1", "write")]

    def test_cursor_rule_holds_on_random_traces(self):
        rng = random.Random(99)
        for _ in range(30):
            b = TraceBuilder()
            for _ in range(rng.randrange(1, 4)):
                act = b.call("A.f", "a.x", 1)
                line = 1
                for _ in range(rng.randrange(2, 20)):
                    line = max(1, line + rng.choice([-4, -1, 1, 1, 2]))
                    b.line(act, line)
                    if rng.random() < 0.5:
                        b.bind(act, line, f"v{rng.randrange(3)}",
                               str(rng.randrange(4)),
                               access=rng.choice(["read", "write"]))
                b.ret(act, 40)
            store = ingest(b.lines())
            cursor = rng.randrange(1, 12)
            ctx = CursorContext("a.x", cursor)
            preferred = select_iteration(store, ctx)
            result = annotate_file(store, ctx)
            if preferred is not None:
                for annotation in result:
                    if annotation.loc.line in preferred.covered_lines:
                        assert annotation.iteration == (preferred.act, preferred.index)
            lines = [a.loc.line for a in result]
            assert lines == sorted(set(lines))
            assert set(lines) == set(store.executed_lines("a.x"))
            for annotation in result:
                names = [e.var for e in annotation.entries]
                assert len(names) == len(set(names))

    def test_deterministic(self):
        store, _ = loop_trace()
        ctx = CursorContext("looper/scan.py", 4)
        assert annotations_to_payload(annotate_file(store, ctx)) == \
            annotations_to_payload(annotate_file(store, ctx))


class TestInvalidation:
    def test_on_edit_any_file_marks_whole_store(self):
        store, _ = activation_with_lines([2])
        on_edit(store, "unrelated/file.x")
        assert store.stale is True

    def test_subsequent_annotate_fails(self):
        store, _ = activation_with_lines([2])
        on_edit(store, "a.x")
        with pytest.raises(StaleTrace):
            annotate_file(store, CursorContext("a.x", 2))

    def test_search_still_allowed_but_flagged(self):
        b = TraceBuilder()
        act = b.call("A.f", "a.x", 1)
        b.line(act, 2)
        b.bind(act, 2, "s", "marker", is_string=True)
        b.ret(act, 3)
        store = ingest(b.lines())
        on_edit(store, "a.x")
        match = open_session(store, SearchQuery("marker")).find_next()
        assert match is not None
        assert match.stale is True


class TestRendering:
    def test_text_renderer_suffixes(self):
        store, _ = loop_trace()
        source = "\n".join(f"line{i}" for i in range(1, 8))
        result = annotate_file(store, CursorContext("looper/scan.py", 4))
        rendered = render_annotated_source(source, result)
        lines = rendered.splitlines()
        assert lines[0] == "line1"
        assert lines[1] == "line2  // found = -1"
        assert lines[3] == "line4  // s = http://, searchStrs[i] = http://"

    def test_payload_shape(self):
        store, act = loop_trace()
        payload = annotations_to_payload(
            annotate_file(store, CursorContext("looper/scan.py", 4))
        )
        assert payload[0] == {
            "file": "looper/scan.py",
            "line": 2,
            "iteration": {"act": act, "index": 1},
            "entries": [{"var": "found", "repr": "-1", "access": "write"}],
        }
