"""Call records, the template decision table, and the succinctness metric."""

from __future__ import annotations

import json
import random

import pytest
from builders import TraceBuilder
from hypothesis import given
from hypothesis import strategies as st

from tracelens.docs import (
    DocEntry,
    MethodCallRecord,
    MethodSpan,
    SourceMap,
    TemplateKind,
    classify,
    collect_records,
    generate_docs,
    render_docs_text,
    render_sentence,
    succinctness,
    succinctness_report,
)
from tracelens.errors import MissingSource
from tracelens.model import ingest


def record(**kwargs) -> MethodCallRecord:
    base = dict(method="Range.lowerBoundType", args=(), recv_before=None,
                recv_after=None, ret=None, exc_type=None, act=1)
    base.update(kwargs)
    return MethodCallRecord(**base)


class TestCollectRecords:
    def test_receiver_and_return_lifted(self):
        b = TraceBuilder()
        act = b.call("Range.lowerBoundType", "guava/Range.x", 1,
                     recv_before="(5..8)")
        b.ret(act, 2, ret="OPEN", recv_after="(5..8)")
        (rec,) = collect_records(ingest(b.lines()))
        assert rec.recv_before == "(5..8)"
        assert rec.ret == "OPEN"
        assert rec.recv_after == "(5..8)"
        assert rec.exc_type is None

    def test_exception_closed_activation(self):
        b = TraceBuilder()
        act = b.call("A.f", "a.x", 1)
        b.exc(act, 2, "ValueError", "bad input")
        (rec,) = collect_records(ingest(b.lines()))
        assert rec.exc_type == "ValueError"
        assert rec.ret is None

    def test_truncated_activations_skipped(self):
        rng = random.Random(5)
        b = TraceBuilder()
        open_acts = []
        for i in range(100):
            act = b.call(f"A.m{i % 10}", "a.x", 1)
            b.line(act, 2)
            open_acts.append(act)
            if len(open_acts) > 1 and rng.random() < 0.8:
                # close an older nested frame? keep discipline: close innermost
                pass
        # close all but seven, innermost first
        for act in reversed(open_acts[7:]):
            b.ret(act, 3)
        store = ingest(b.lines())
        closed = sum(1 for a in store.activations.values() if not a.truncated)
        records = collect_records(store)
        assert len(records) == closed == 93


class TestClassify:
    def test_returned_only(self):
        rec = record(recv_before="(5..8)", recv_after="(5..8)", ret="OPEN")
        assert classify(rec) is TemplateKind.RETURNED_ONLY

    def test_changed_only(self):
        rec = record(method="List.add", recv_before="[]", recv_after="[1]")
        assert classify(rec) is TemplateKind.CHANGED_ONLY

    def test_threw_dominates(self):
        rec = record(method="List.get", exc_type="IndexError")
        assert classify(rec) is TemplateKind.THREW

    def test_returned_and_changed(self):
        rec = record(method="Stack.pop", recv_before="[1, 2]",
                     recv_after="[1]", ret="2")
        assert classify(rec) is TemplateKind.RETURNED_AND_CHANGED

    def test_no_effect(self):
        rec = record(method="Log.flush")
        assert classify(rec) is TemplateKind.NO_EFFECT

    def test_constructed_by_final_segment(self):
        rec = record(method="pkg.Guestbook.<init>", recv_after="Guestbook[]")
        assert classify(rec) is TemplateKind.CONSTRUCTED
        assert classify(rec, constructor_marker="__init__") is TemplateKind.NO_EFFECT

    @given(
        ret=st.one_of(st.none(), st.text("r", min_size=1, max_size=3)),
        recv_before=st.one_of(st.none(), st.sampled_from(["s1", "s2"])),
        recv_changed=st.booleans(),
        threw=st.booleans(),
        method=st.sampled_from(["A.f", "A.<init>", "p.q.Klass.run"]),
    )
    def test_classification_total_and_unambiguous(
        self, ret, recv_before, recv_changed, threw, method
    ):
        recv_after = None
        if recv_before is not None:
            recv_after = recv_before + "x" if recv_changed else recv_before
        rec = record(
            method=method,
            ret=None if threw else ret,
            exc_type="Boom" if threw else None,
            recv_before=recv_before,
            recv_after=recv_after,
        )
        kinds = [k for k in TemplateKind if classify(rec) is k]
        assert len(kinds) == 1


class TestRenderSentence:
    def test_guava_open_sentence(self):
        rec = record(recv_before="(5..8)", recv_after="(5..8)", ret="OPEN")
        assert render_sentence(rec) == "When called on (5..8), the method returned OPEN."

    def test_guava_closed_sentence(self):
        rec = record(recv_before="[5..8)", recv_after="[5..8)", ret="CLOSED")
        assert render_sentence(rec) == "When called on [5..8), the method returned CLOSED."

    def test_threw_with_args_no_receiver(self):
        rec = record(method="A.parse", args=(("n", "3"),), exc_type="ValueError")
        assert render_sentence(rec) == (
            "When called with arguments (3), the method threw ValueError."
        )

    def test_changed_only_sentence(self):
        rec = record(method="List.add", recv_before="[]", recv_after="[1]",
                     args=(("item", "1"),))
        assert render_sentence(rec) == (
            "When called on [] with arguments (1), the object changed to [1]."
        )

    def test_returned_and_changed_sentence(self):
        rec = record(method="Stack.pop", recv_before="[1, 2]", recv_after="[1]",
                     ret="2")
        assert render_sentence(rec) == (
            "When called on [1, 2], the method returned 2 "
            "and the object changed to [1]."
        )

    def test_no_effect_sentence(self):
        rec = record(method="Log.flush", recv_before="Log()", recv_after="Log()")
        assert render_sentence(rec) == (
            "When called on Log(), the method completed with no observable effect."
        )

    def test_constructed_sentence(self):
        rec = record(method="pkg.Guestbook.<init>", args=(("owner", "ana"),),
                     recv_after="Guestbook[owner=ana]")
        assert render_sentence(rec) == (
            "When constructed with arguments (ana), "
            "the object became Guestbook[owner=ana]."
        )

    @given(
        ret=st.one_of(st.none(), st.text("r", min_size=1, max_size=3)),
        recv=st.one_of(st.none(), st.sampled_from(["s1", "s2"])),
        changed=st.booleans(),
        threw=st.booleans(),
    )
    def test_sentence_mentions_ret_and_exc_consistently(self, ret, recv, changed, threw):
        # Value pools use disjoint alphabets so containment checks are exact.
        recv_after = None
        if recv is not None:
            recv_after = recv + "z" if changed else recv
        rec = record(
            method="A.f",
            ret=None if threw else ret,
            exc_type="EXC" if threw else None,
            recv_before=recv,
            recv_after=recv_after,
        )
        sentence = render_sentence(rec)
        kind = classify(rec)
        expects_ret = kind in (TemplateKind.RETURNED_ONLY,
                               TemplateKind.RETURNED_AND_CHANGED)
        if rec.ret is not None:
            assert (rec.ret in sentence) == expects_ret
        assert ("EXC" in sentence) == (kind is TemplateKind.THREW)


class TestGenerateDocs:
    def test_identical_calls_deduplicate(self):
        b = TraceBuilder()
        for _ in range(2):
            act = b.call("Range.lowerBoundType", "r.x", 1, recv_before="(5..8)")
            b.ret(act, 2, ret="OPEN", recv_after="(5..8)")
        (entry,) = generate_docs(ingest(b.lines()))
        assert entry.sentences == (
            "When called on (5..8), the method returned OPEN.",
        )
        assert entry.example_count == 2
        assert entry.distinct_count == 1

    def test_kind_coverage_beats_same_kind_variants(self):
        b = TraceBuilder()
        for value in ("OPEN", "CLOSED", "HALF"):
            act = b.call("R.kind", "r.x", 1, recv_before="(1..2)")
            b.ret(act, 2, ret=value, recv_after="(1..2)")
        act = b.call("R.kind", "r.x", 1, recv_before="(1..2)")
        b.exc(act, 2, "IllegalState", "no bound")
        (entry,) = generate_docs(ingest(b.lines()), k=2)
        assert entry.sentences == (
            "When called on (1..2), the method returned OPEN.",
            "When called on (1..2), the method threw IllegalState.",
        )
        assert entry.distinct_count == 4

    def test_prefix_filter(self):
        b = TraceBuilder()
        for method in [f"Range.m{i}" for i in range(5)] + [f"Other.m{i}" for i in range(5)]:
            act = b.call(method, "r.x", 1)
            b.ret(act, 2, ret="1")
        entries = generate_docs(ingest(b.lines()), method_prefix="Range.")
        assert len(entries) == 5
        assert all(e.method.startswith("Range.") for e in entries)

    def test_entries_sorted_and_deterministic(self):
        b = TraceBuilder()
        for method in ("z.f", "a.f", "m.f"):
            act = b.call(method, "r.x", 1)
            b.ret(act, 2, ret="ok", is_string=True)
        lines = b.lines()
        first = render_docs_text(generate_docs(ingest(lines)))
        second = render_docs_text(generate_docs(ingest(list(lines))))
        assert first == second
        assert [e.method for e in generate_docs(ingest(lines))] == ["a.f", "m.f", "z.f"]

    def test_dedup_soundness_on_random_traces(self):
        rng = random.Random(77)
        b = TraceBuilder()
        for _ in range(60):
            act = b.call(f"A.m{rng.randrange(4)}", "a.x", 1,
                         recv_before=rng.choice([None, "obj"]))
            if rng.random() < 0.2:
                b.exc(act, 2, "Err", "x")
            else:
                b.ret(act, 2, ret=rng.choice([None, "1", "2"]))
        store = ingest(b.lines())
        for entry in generate_docs(store, k=2):
            assert len(entry.sentences) == len(set(entry.sentences)) <= 2
            rendered = {
                render_sentence(r) for r in collect_records(store)
                if r.method == entry.method
            }
            assert set(entry.sentences) <= rendered

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            generate_docs(ingest([]), k=0)


class TestSuccinctness:
    def test_ten_percent_ratio(self, tmp_path):
        source = tmp_path / "m.x"
        body = "x" * 150 + "\n" + "y" * 249  # 400 chars once newline -> space
        source.write_text(body + "\n", encoding="utf-8")
        source_map = SourceMap(
            {"A.f": MethodSpan(file="m.x", start_line=1, end_line=2)}, tmp_path
        )
        entry = DocEntry(method="A.f", sentences=("s" * 40,), example_count=1,
                         distinct_count=1)
        assert succinctness(entry, source_map) == pytest.approx(0.10, abs=1e-12)

    def test_missing_method(self, tmp_path):
        source_map = SourceMap({}, tmp_path)
        entry = DocEntry(method="A.f", sentences=("hi",), example_count=1,
                         distinct_count=1)
        with pytest.raises(MissingSource):
            succinctness(entry, source_map)

    def test_report_collects_missing_and_mean(self, tmp_path):
        (tmp_path / "m.x").write_text("def f():\n    return 1\n", encoding="utf-8")
        source_map = SourceMap({"A.f": MethodSpan("m.x", 1, 2)}, tmp_path)
        entries = [
            DocEntry("A.f", ("When called, the method returned 1.",), 1, 1),
            DocEntry("A.ghost", ("x",), 1, 1),
        ]
        report = succinctness_report(entries, source_map)
        assert report.missing == ("A.ghost",)
        assert report.mean == pytest.approx(report.ratios["A.f"])
