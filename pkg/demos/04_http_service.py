"""Driving the HTTP API that backs the web UI.

The same service normally runs via

    tracelens serve tests/fixtures/webapp_demo.jsonl \
        --source-root tests/fixtures/src \
        --source-map tests/fixtures/source_map.json \
        --ui-dir frontend/dist

Here it is exercised in-process.  Requires the dev extra (httpx).

Run: python3 demos/04_http_service.py
"""

import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from tracelens.service import ServeConfig, create_app

FIXTURES = Path(__file__).parent.parent / "tests/fixtures"

with tempfile.TemporaryDirectory() as tmp:
    trace = Path(tmp) / "webapp_demo.jsonl"
    shutil.copy(FIXTURES / "webapp_demo.jsonl", trace)
    app = create_app(ServeConfig(
        trace_path=trace,
        source_root=FIXTURES / "src",
        source_map_path=FIXTURES / "source_map.json",
        constructor_marker="__init__",
    ))
    client = TestClient(app)

    print("files:", client.get("/api/files").json()["files"])

    sid = client.post("/api/search/sessions",
                      json={"query": {"needle": "XyZzY123"}}).json()["id"]
    print(f"\nsession {sid}, stepping through matches:")
    while not (body := client.post(f"/api/search/sessions/{sid}/next").json()).get("exhausted"):
        m = body["match"]
        print(f"  {m['method']} at {m['file']}:{m['line']}  {m['label']}={m['text']!r}")

    docs = client.get("/api/docs", params={"prefix": "guestbook.core."}).json()
    print("\ndocs for guestbook.core.*:")
    for entry in docs["entries"]:
        for sentence in entry["sentences"]:
            print(f"  {entry['method']}: {sentence}")

    print("\ninvalidate, then try annotations:")
    client.post("/api/invalidate", json={})
    response = client.get("/api/annotations", params={"file": "guestbook/app.py"})
    print(f"  status {response.status_code} (stale={response.json()['stale']})")
