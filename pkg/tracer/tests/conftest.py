from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def run_tracer(workdir: Path, script_name: str, *flags: str,
               script_dir: Path = DEMOS) -> tuple[subprocess.CompletedProcess, Path]:
    """Trace one demo script in ``workdir`` via the CLI; returns (proc, trace path)."""
    script = workdir / script_name
    if not script.exists():
        shutil.copy(script_dir / script_name, script)
    out = workdir / (script.stem + ".jsonl")
    proc = subprocess.run(
        [sys.executable, "-m", "tracelens_tracer.cli",
         "--out", str(out), *flags, "--", script_name],
        cwd=workdir, capture_output=True, text=True, timeout=120,
    )
    return proc, out


def validate_with_tracelens(trace: Path) -> subprocess.CompletedProcess:
    """Check a trace through the analysis package's external CLI."""
    return subprocess.run(
        [sys.executable, "-m", "tracelens.cli", "validate", str(trace)],
        capture_output=True, text=True, timeout=60,
    )


def read_events(trace: Path) -> list[dict]:
    return [json.loads(line) for line in trace.read_text("utf-8").splitlines()]


@pytest.fixture
def demos_dir() -> Path:
    return DEMOS
