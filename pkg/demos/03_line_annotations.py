"""End-of-line sample values that follow the cursor.

The loop demo runs a scan over two prefixes, so its body lines execute
three times.  Moving the cursor between iterations switches which pass
supplies the displayed values; unchanged repeated reads are filtered out.

Run: python3 demos/03_line_annotations.py
"""

from pathlib import Path

from tracelens import CursorContext, annotate_file, load_trace, on_edit
from tracelens.annotate import render_annotated_source
from tracelens.errors import StaleTrace

FIXTURES = Path(__file__).parent.parent / "tests/fixtures"

store = load_trace(FIXTURES / "loop_demo.jsonl")
source = (FIXTURES / "src/looper/scan.py").read_text(encoding="utf-8")

for cursor in (4, 6):
    print(f"== cursor on line {cursor} ==")
    annotations = annotate_file(store, CursorContext("looper/scan.py", cursor))
    print(render_annotated_source(source, annotations))

# Any edit invalidates everything until the program is re-traced.
on_edit(store, "looper/scan.py")
try:
    annotate_file(store, CursorContext("looper/scan.py", 4))
except StaleTrace as err:
    print(f"after an edit: {err}")
print("…but an explicit override is available:",
      len(annotate_file(store, CursorContext("looper/scan.py", 4),
                        allow_stale=True)), "lines annotated (stale)")
