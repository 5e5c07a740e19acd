"""Hook-based trace recorder for Python programs.

Hooks the interpreter's standard tracing facility (``sys.settrace``) and
emits the tracelens JSONL trace format: a call event with argument and
receiver representations, a line event per executed line, bind events for
the variables each line read or wrote (emitted once the line's effects are
complete, i.e. at the next line/return of the same frame), and a return or
exception event closing each activation.

Representations come from the host's standard to-string conversion
(``str``), bounded for containers and truncated to a configured length.
Variables are classified as written when their representation changed (or
they are new) and as read when they appear in the line's source text
unchanged.

Generators look like one activation per resume (the interpreter reports a
call on every resume); the resulting traces are still well formed.
"""

from __future__ import annotations

import json
import linecache
import re
import reprlib
import sys
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, TextIO

_NAME_RE = re.compile(r"[A-Za-z_]\w*")

_BOUNDED = reprlib.Repr()
_BOUNDED.maxlevel = 3
_BOUNDED.maxlist = _BOUNDED.maxtuple = _BOUNDED.maxset = _BOUNDED.maxdict = 6
_BOUNDED.maxstring = 200
_BOUNDED.maxother = 200

TRUNCATION_MARK = "…"


@dataclass(frozen=True)
class TracerConfig:
    """What to trace and how to render values.

    ``include``/``exclude`` are module-name prefixes; with an empty include
    list every module whose source file lives under ``root`` is traced.
    Files outside ``root`` (the stdlib, site-packages) are never traced.
    """

    output: Path | None = None
    live_addr: tuple[str, int] | None = None
    include: tuple[str, ...] = ()
    exclude: tuple[str, ...] = ()
    root: Path = field(default_factory=Path.cwd)
    max_repr_len: int = 120
    is_string: Callable[[Any], bool] = lambda value: isinstance(value, str)

    def __post_init__(self) -> None:
        if self.max_repr_len < 8:
            raise ValueError("max_repr_len must be at least 8")
        overlap = [p for p in self.include if any(
            p.startswith(e) or e.startswith(p) for e in self.exclude)]
        if overlap:
            raise ValueError(f"include/exclude prefixes overlap: {overlap}")
        if self.output is None and self.live_addr is None:
            raise ValueError("need an output path or a live address")


def bounded_str(value: Any, limit: int) -> str:
    """The standard string conversion, kept safe and bounded."""
    try:
        if isinstance(value, str):
            text = value
        elif isinstance(value, (list, tuple, set, frozenset, dict)):
            text = _BOUNDED.repr(value)
        else:
            text = str(value)
    except Exception:
        text = f"<unprintable {type(value).__name__}>"
    if len(text) > limit:
        text = text[:limit] + TRUNCATION_MARK
    return text


@lru_cache(maxsize=16384)
def line_text(filename: str, lineno: int) -> str:
    return linecache.getline(filename, lineno)


@lru_cache(maxsize=16384)
def names_on_line(filename: str, lineno: int) -> frozenset[str]:
    """Identifier-shaped tokens on one source line (read detection)."""
    return frozenset(_NAME_RE.findall(line_text(filename, lineno)))


class FileWriter:
    """JSONL emission to a file."""

    def __init__(self, stream: TextIO):
        self._stream = stream

    def emit(self, record: dict, line: str, tracer: "Tracer", frame: Any) -> None:
        self._stream.write(line + "\n")

    def close(self) -> None:
        self._stream.flush()
        self._stream.close()


class _FrameState:
    __slots__ = ("act", "method", "file", "pending_line", "snapshot",
                 "pending_exc", "recv")

    def __init__(self, act: int, method: str, file: str, recv: Any | None):
        self.act = act
        self.method = method
        self.file = file
        self.pending_line: int | None = None
        self.snapshot: dict[str, str] = {}
        self.pending_exc: tuple[str, str, int] | None = None
        self.recv = recv


class Tracer:
    """Emits the trace format for every frame selected by the config.

    A process-global lock serializes sequence assignment and emission, so
    seq is strictly increasing in file order even with multiple threads.
    """

    def __init__(self, config: TracerConfig, writer) -> None:
        self.config = config
        self._writer = writer
        self._lock = threading.Lock()
        self._seq = 0
        self._acts = 0
        self._root = str(config.root.resolve())
        self._mirror: list[str] | None = [] if config.live_addr else None
        self._thread_names = threading.local()

    def _thread_name(self) -> str:
        name = getattr(self._thread_names, "name", None)
        if name is None:
            name = threading.current_thread().name
            self._thread_names.name = name
        return name

    # -- selection ---------------------------------------------------------

    def _relative_file(self, filename: str) -> str | None:
        if not filename or filename.startswith("<"):
            return None
        try:
            path = Path(filename).resolve()
            rel = path.relative_to(self._root)
        except ValueError:
            return None
        return rel.as_posix()

    def _selects(self, module: str) -> bool:
        if module == __name__ or module.startswith("tracelens_tracer"):
            return False
        if any(module.startswith(p) for p in self.config.exclude):
            return False
        if self.config.include:
            return any(module.startswith(p) for p in self.config.include)
        return True

    @staticmethod
    def _method_name(frame: Any, module: str) -> str:
        code = frame.f_code
        owner = ""
        if code.co_varnames[:1] == ("self",) and "self" in frame.f_locals:
            owner = type(frame.f_locals["self"]).__name__ + "."
        elif code.co_varnames[:1] == ("cls",) and "cls" in frame.f_locals:
            cls = frame.f_locals["cls"]
            if isinstance(cls, type):
                owner = cls.__name__ + "."
        return f"{module}.{owner}{code.co_name}"

    # -- emission ----------------------------------------------------------

    def _emit(self, record: dict, frame: Any) -> None:
        # The lock spans seq assignment AND the write, so the file is in
        # seq order and lines never interleave.  A live pause blocks while
        # holding it, which is fine: live mode traces a single thread.
        with self._lock:
            self._seq += 1
            record["seq"] = self._seq
            line = json.dumps(record, ensure_ascii=False, separators=(",", ":"))
            if self._mirror is not None:
                self._mirror.append(line)
            try:
                self._writer.emit(record, line, self, frame)
            except OSError:
                self._fall_back_to_file_locked()

    def _fall_back_to_file_locked(self) -> None:
        """Live socket lost: replay the mirror into a file and carry on."""
        if isinstance(self._writer, FileWriter):
            return
        path = self.config.output or Path("trace.fallback.jsonl")
        stream = open(path, "w", encoding="utf-8")
        for line in self._mirror or ():
            stream.write(line + "\n")
        self._writer = FileWriter(stream)
        self._mirror = None

    def close(self) -> None:
        with self._lock:
            try:
                self._writer.close()
            except OSError:
                self._fall_back_to_file_locked()
                self._writer.close()

    def _record(self, kind: str, state: _FrameState, line: int) -> dict:
        return {
            "seq": 0,  # assigned under the lock at emission time
            "kind": kind,
            "thread": self._thread_name(),
            "act": state.act,
            "loc": {"file": state.file, "line": line},
        }

    def _value(self, value: Any) -> dict:
        return {
            "repr": bounded_str(value, self.config.max_repr_len),
            "is_string": bool(self.config.is_string(value)),
        }

    # -- the hook ----------------------------------------------------------

    def global_trace(self, frame: Any, event: str, arg: Any):
        if event != "call":
            return None
        module = frame.f_globals.get("__name__") or ""
        if not self._selects(module):
            return None
        file = self._relative_file(frame.f_code.co_filename)
        if file is None:
            return None

        with self._lock:
            self._acts += 1
            act = self._acts
        code = frame.f_code
        local_names = code.co_varnames[:code.co_argcount + code.co_kwonlyargcount]
        recv = None
        args = []
        for i, name in enumerate(local_names):
            if name not in frame.f_locals:
                continue
            value = frame.f_locals[name]
            if i == 0 and name in ("self", "cls"):
                recv = value
                continue
            entry = self._value(value)
            entry = {"name": name, **entry}
            args.append(entry)
        state = _FrameState(act, self._method_name(frame, module), file, recv)

        record = self._record("call", state, frame.f_lineno)
        record["method"] = state.method
        record["args"] = args
        record["recv_before"] = (
            bounded_str(recv, self.config.max_repr_len) if recv is not None else None
        )
        self._emit(record, frame)

        def local_trace(frame: Any, event: str, arg: Any):
            if event == "line":
                self._flush_binds(state, frame)
                state.pending_exc = None
                state.pending_line = frame.f_lineno
                state.snapshot = self._snapshot(frame)
                self._emit(self._record("line", state, frame.f_lineno), frame)
            elif event == "exception":
                exc_type, exc_value = arg[0], arg[1]
                state.pending_exc = (
                    exc_type.__name__,
                    bounded_str(exc_value, self.config.max_repr_len),
                    frame.f_lineno,
                )
            elif event == "return":
                self._flush_binds(state, frame)
                if state.pending_exc is not None:
                    exc_name, exc_msg, exc_line = state.pending_exc
                    record = self._record("exception", state, exc_line)
                    record["method"] = state.method
                    record["exc_type"] = exc_name
                    record["msg"] = exc_msg
                else:
                    record = self._record("return", state, frame.f_lineno)
                    record["method"] = state.method
                    record["ret"] = None if arg is None else self._value(arg)
                    record["recv_after"] = (
                        bounded_str(state.recv, self.config.max_repr_len)
                        if state.recv is not None else None
                    )
                self._emit(record, frame)
            return local_trace

        return local_trace

    def _snapshot(self, frame: Any) -> dict[str, str]:
        limit = self.config.max_repr_len
        return {
            name: bounded_str(value, limit)
            for name, value in frame.f_locals.items()
        }

    def _flush_binds(self, state: _FrameState, frame: Any) -> None:
        """Emit the completed line's variable observations, writes and reads."""
        line = state.pending_line
        if line is None:
            return
        state.pending_line = None
        limit = self.config.max_repr_len
        current = frame.f_locals
        filename = frame.f_code.co_filename
        source_names = names_on_line(filename, line)
        source_text = line_text(filename, line)
        observed: list[tuple[int, str, str, bool, str]] = []
        for name, value in current.items():
            text = bounded_str(value, limit)
            if name not in state.snapshot or state.snapshot[name] != text:
                access = "write"
            elif name in source_names:
                access = "read"
            else:
                continue
            position = source_text.find(name)
            if position < 0:
                position = len(source_text)
            observed.append((position, name, text,
                             bool(self.config.is_string(value)), access))
        for _, name, text, is_string, access in sorted(observed):
            record = self._record("bind", state, line)
            record["var"] = name
            record["repr"] = text
            record["is_string"] = is_string
            record["access"] = access
            self._emit(record, frame)


def run_traced(command: list[str], config: TracerConfig) -> int:
    """Run a Python script under the tracer; returns the script's exit status.

    The trace is flushed and well formed even when the target dies with an
    exception.  In live mode only the main thread is traced (the pause
    protocol is per-connection); file mode traces all threads.
    """
    import runpy

    if not command:
        raise ValueError("no command given")
    argv = list(command)
    if Path(argv[0]).name in ("python", "python3") or argv[0] == sys.executable:
        argv = argv[1:]
    if not argv:
        raise ValueError("no script to run")
    script = argv[0]

    if config.live_addr is not None:
        from .live import LiveWriter

        writer = LiveWriter.connect(config.live_addr)
    else:
        assert config.output is not None
        writer = FileWriter(open(config.output, "w", encoding="utf-8"))

    tracer = Tracer(config, writer)
    old_argv = sys.argv
    sys.argv = argv
    exit_code = 0
    if config.live_addr is None:
        threading.settrace(tracer.global_trace)
    sys.settrace(tracer.global_trace)
    try:
        runpy.run_path(script, run_name="__main__")
    except SystemExit as exc:
        code = exc.code
        exit_code = code if isinstance(code, int) else (0 if code is None else 1)
    except BaseException:
        sys.settrace(None)
        import traceback

        traceback.print_exc()
        exit_code = 1
    finally:
        sys.settrace(None)
        threading.settrace(None)  # type: ignore[arg-type]
        sys.argv = old_argv
        tracer.close()
    return exit_code
