"""Searching recorded runtime values, including the fabricated-text trick.

The bundled guestbook trace was recorded with the distinctive marker
"XyZzY123" typed into the entry prompt.  Searching for the marker shows the
string flowing from the input layer through normalization and storage to
the rendered banner, without reading a line of code first.

Run: python3 demos/01_search_runtime_values.py
"""

from pathlib import Path

from tracelens import SearchQuery, SearchScope, load_trace, open_session

TRACE = Path(__file__).parent.parent / "tests/fixtures/webapp_demo.jsonl"


def show(title, session):
    print(f"\n== {title} ==")
    while (match := session.find_next()) is not None:
        c = match.candidate
        print(f"seq {c.seq:>3}  {c.origin.value:<18} {match.method:<40} "
              f"{match.loc.file}:{match.loc.line}  {c.label} = {c.text!r}")


store = load_trace(TRACE)
print(f"loaded {len(store.events)} events, {len(store.activations)} activations")

# The marker crosses three layers: ui -> core -> render.
show("marker flow", open_session(store, SearchQuery("XyZzY123")))

# Scoping works like selecting packages in an IDE search.
show("marker, render layer only", open_session(
    store, SearchQuery("XyZzY123"),
    SearchScope(method_prefixes=("guestbook.render.",)),
))

# Exception messages are searchable too: where did that error text come from?
show("error message origin", open_session(store, SearchQuery("entry too short")))

# Pausing semantics: each find_next is one "pause"; locals travel with it.
session = open_session(store, SearchQuery("ana says:"))
match = session.find_next()
print(f"\npaused at seq {match.candidate.seq} in {match.method}; frame locals:")
for var, value in match.frame_locals:
    print(f"  {var} = {value}")
