"""Local HTTP API over one loaded trace, plus the static web UI bundle.

Every JSON response carries a ``stale`` flag.  Annotation requests are
staleness-sensitive (409 after invalidation unless allowed); search and
docs stay available on a stale trace and just carry the flag.  Search
sessions are server-side state with ids and an idle expiry; each session
is internally serialized so concurrent ``next`` calls cannot race.
"""

from __future__ import annotations

import itertools
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .annotate import CursorContext, annotate_file, annotations_to_payload
from .docs import (
    DEFAULT_CONSTRUCTOR_MARKER,
    DEFAULT_SENTENCE_CAP,
    SourceMap,
    docs_to_payload,
    generate_docs,
    succinctness_report,
)
from .errors import StaleTrace
from .model import TraceStore
from .search import SearchMatch, SearchQuery, SearchScope, SearchSession, open_session

SESSION_IDLE_TTL = 600.0  # seconds; sessions expire after 10 idle minutes


@dataclass
class ServeConfig:
    trace_path: Path
    source_root: Path
    source_map_path: Path | None = None
    port: int = 8077
    allow_stale: bool = False
    ui_dir: Path | None = None
    constructor_marker: str = DEFAULT_CONSTRUCTOR_MARKER

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} outside [1, 65535]")


class _HttpSession:
    def __init__(self, session: SearchSession, now: float):
        self.session = session
        self.lock = threading.Lock()
        self.last_used = now


def _match_payload(match: SearchMatch) -> dict[str, Any]:
    return {
        "seq": match.candidate.seq,
        "index": match.candidate.index,
        "origin": match.candidate.origin.value,
        "label": match.candidate.label,
        "text": match.candidate.text,
        "method": match.method,
        "file": match.loc.file,
        "line": match.loc.line,
        "act": match.act,
        "frame_locals": [[var, value] for var, value in match.frame_locals],
    }


def _parse_bool(text: str | None) -> bool:
    return (text or "").lower() in ("1", "true", "yes", "on")


def create_app(
    config: ServeConfig,
    *,
    clock: Callable[[], float] = time.monotonic,
    session_ttl: float = SESSION_IDLE_TTL,
) -> FastAPI:
    from .cli import load_store, write_stale_marker

    store: TraceStore = load_store(config.trace_path)
    source_root = config.source_root.resolve()
    source_map = None
    if config.source_map_path is not None:
        source_map = SourceMap.load(config.source_map_path, source_root)

    app = FastAPI(title="tracelens", docs_url=None, redoc_url=None)
    sessions: dict[str, _HttpSession] = {}
    sessions_guard = threading.Lock()
    ids = itertools.count(1)

    def ok(body: dict[str, Any], status: int = 200) -> JSONResponse:
        body["stale"] = store.stale
        return JSONResponse(body, status_code=status)

    def fail(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message, "stale": store.stale},
                            status_code=status)

    def purge_sessions(now: float) -> None:
        with sessions_guard:
            for sid in [s for s, h in sessions.items()
                        if now - h.last_used > session_ttl]:
                del sessions[sid]

    @app.get("/api/files")
    def files() -> JSONResponse:
        return ok({"files": list(store.files())})

    @app.get("/api/source")
    def source(file: str | None = None) -> JSONResponse:
        if not file:
            return fail(400, "missing required parameter 'file'")
        path = (source_root / file).resolve()
        if not path.is_relative_to(source_root):
            return fail(400, "path escapes the source root")
        if not path.is_file():
            return fail(404, f"unknown file {file!r}")
        return ok({"file": file, "text": path.read_text(encoding="utf-8")})

    @app.get("/api/annotations")
    def annotations(
        file: str | None = None,
        cursor: str | None = None,
        allow_stale: str | None = None,
    ) -> JSONResponse:
        if not file:
            return fail(400, "missing required parameter 'file'")
        try:
            cursor_line = int(cursor) if cursor is not None else 1
            ctx = CursorContext(file=file, cursor_line=cursor_line)
        except ValueError as err:
            return fail(400, f"bad cursor: {err}")
        if file not in store.files():
            path = (source_root / file).resolve()
            if not (path.is_relative_to(source_root) and path.is_file()):
                return fail(404, f"unknown file {file!r}")
        allowed = config.allow_stale or _parse_bool(allow_stale)
        try:
            result = annotate_file(store, ctx, allow_stale=allowed)
        except StaleTrace as err:
            return fail(409, str(err))
        return ok({
            "file": file,
            "cursor": ctx.cursor_line,
            "annotations": annotations_to_payload(result),
        })

    @app.get("/api/docs")
    def docs(prefix: str = "", k: str | None = None) -> JSONResponse:
        try:
            cap = int(k) if k is not None else DEFAULT_SENTENCE_CAP
            entries = generate_docs(
                store, method_prefix=prefix, k=cap,
                constructor_marker=config.constructor_marker,
            )
        except ValueError as err:
            return fail(400, f"bad k: {err}")
        payload = docs_to_payload(entries)
        if source_map is not None:
            report = succinctness_report(entries, source_map)
            for item in payload:
                item["succinctness"] = report.ratios.get(item["method"])
        return ok({"entries": payload})

    @app.post("/api/search/sessions")
    async def create_session(request: Request) -> JSONResponse:
        now = clock()
        purge_sessions(now)
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return fail(400, "request body is not valid JSON")
        if not isinstance(body, dict) or not isinstance(body.get("query"), dict):
            return fail(400, "body must be an object with a 'query' object")
        query_body = body["query"]
        needle = query_body.get("needle")
        if not isinstance(needle, str) or not needle:
            return fail(400, "query.needle must be a non-empty string")
        scope_body = body.get("scope") or {}
        if not isinstance(scope_body, dict):
            return fail(400, "scope must be an object")
        session = open_session(
            store,
            SearchQuery(
                needle=needle,
                case_sensitive=bool(query_body.get("case_sensitive", True)),
            ),
            SearchScope(
                method_prefixes=tuple(scope_body.get("method_prefixes") or ()),
                file_globs=tuple(scope_body.get("file_globs") or ()),
            ),
        )
        sid = f"s{next(ids)}"
        with sessions_guard:
            sessions[sid] = _HttpSession(session, now)
        return ok({"id": sid})

    @app.post("/api/search/sessions/{sid}/next")
    def next_match(sid: str) -> JSONResponse:
        now = clock()
        purge_sessions(now)
        with sessions_guard:
            holder = sessions.get(sid)
        if holder is None:
            return fail(404, f"unknown or expired session {sid!r}")
        with holder.lock:
            holder.last_used = now
            match = holder.session.find_next()
        if match is None:
            return ok({"exhausted": True})
        return ok({"match": _match_payload(match)})

    @app.post("/api/invalidate")
    async def invalidate(request: Request) -> JSONResponse:
        # The edited file does not matter: invalidation is store-global.
        try:
            if await request.body():
                await request.json()
        except json.JSONDecodeError:
            return fail(400, "request body is not valid JSON")
        store.mark_stale()
        write_stale_marker(config.trace_path)
        return ok({})

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    app.state.store = store
    app.state.config = config
    return app
