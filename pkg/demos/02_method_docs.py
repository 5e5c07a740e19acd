"""Example-based method documentation and the succinctness report.

Every completed call is folded into a record (arguments, return, receiver
before/after, or thrown exception) and rendered as one sentence.  The
succinctness report relates sentence length to method length.

Run: python3 demos/02_method_docs.py
"""

from pathlib import Path

from tracelens import SourceMap, generate_docs, load_trace, succinctness_report
from tracelens.docs import render_docs_text, render_succinctness_text

FIXTURES = Path(__file__).parent.parent / "tests/fixtures"

# The classic two-sentence example: one method, two observed receivers.
range_store = load_trace(FIXTURES / "range_demo.jsonl")
print(render_docs_text(generate_docs(range_store)))

# A whole small app; __init__ marks constructors in Python-flavored traces.
store = load_trace(FIXTURES / "webapp_demo.jsonl")
entries = generate_docs(store, constructor_marker="__init__")
print(render_docs_text(entries))

source_map = SourceMap.load(FIXTURES / "source_map.json", FIXTURES / "src")
print("succinctness (sentence length / method length)")
print(render_succinctness_text(succinctness_report(entries, source_map)))
