"""Command-line entry points: search, docs, annotate, serve, validate.

Exit codes are a stable contract: 0 success (search: at least one match),
2 malformed input, 3 no matches, 4 stale trace without --allow-stale.

A trace is considered stale on load when a sidecar marker file
``<trace>.stale`` exists and is at least as new as the trace itself; the
marker is written by the serve endpoint POST /api/invalidate (and by
anything else that observes a source edit), so one-shot commands see the
same staleness a long-running service does.  Re-recording the trace makes
the marker older and clears the condition.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .annotate import (
    CursorContext,
    annotate_file,
    annotations_to_payload,
    render_annotated_source,
)
from .docs import (
    DEFAULT_CONSTRUCTOR_MARKER,
    DEFAULT_SENTENCE_CAP,
    SourceMap,
    docs_to_payload,
    generate_docs,
    render_docs_text,
    render_succinctness_text,
    succinctness_report,
)
from .errors import (
    MalformedRecord,
    NonMonotonicSeq,
    OrphanEvent,
    StaleTrace,
    TraceLensError,
)
from .model import TraceStore, load_trace
from .search import SearchMatch, SearchQuery, SearchScope, open_session

EXIT_OK = 0
EXIT_MALFORMED = 2
EXIT_NO_MATCHES = 3
EXIT_STALE = 4


def stale_marker_path(trace_path: Path) -> Path:
    return Path(str(trace_path) + ".stale")


def write_stale_marker(trace_path: Path) -> None:
    stale_marker_path(trace_path).touch()


def load_store(trace_path: Path) -> TraceStore:
    """Ingest a trace and apply the sidecar staleness marker, if current."""
    store = load_trace(trace_path)
    marker = stale_marker_path(trace_path)
    if marker.exists() and marker.stat().st_mtime >= trace_path.stat().st_mtime:
        store.mark_stale()
    return store


def dump_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _match_line(match: SearchMatch) -> str:
    return "\t".join([
        str(match.candidate.seq),
        match.candidate.origin.value,
        match.method,
        f"{match.loc.file}:{match.loc.line}",
        match.candidate.text,
    ])


def cmd_search(args: argparse.Namespace) -> int:
    store = load_store(Path(args.trace))
    if store.stale:
        print("warning: trace is stale (source was edited since recording)",
              file=sys.stderr)
    query = SearchQuery(needle=args.needle, case_sensitive=not args.ignore_case)
    scope = SearchScope(
        method_prefixes=tuple(args.method_prefix or ()),
        file_globs=tuple(args.file_glob or ()),
    )
    session = open_session(
        store, query, scope, include_exception_text=not args.no_exception_text
    )
    if args.interactive:
        return _search_repl(store, session, args)
    found = 0
    while (match := session.find_next()) is not None:
        print(_match_line(match))
        found += 1
    if found == 0:
        print("no matches")
        return EXIT_NO_MATCHES
    return EXIT_OK


def _search_repl(store: TraceStore, session, args: argparse.Namespace) -> int:
    """Line-oriented loop: n (next), locals, scope <prefix>, q."""
    last: SearchMatch | None = None
    last_pos = (0, -1)
    print("commands: n (next match), locals, scope <method-prefix>, q", file=sys.stderr)
    for raw in sys.stdin:
        command = raw.strip()
        if command == "q":
            break
        if command == "n":
            while (match := session.find_next()) is not None:
                pos = (match.candidate.seq, match.candidate.index)
                if pos > last_pos:
                    break
            if match is None:
                print("exhausted")
            else:
                last = match
                last_pos = (match.candidate.seq, match.candidate.index)
                print(_match_line(match))
        elif command == "locals":
            if last is None:
                print("no current match")
            else:
                for var, value in last.frame_locals:
                    print(f"{var} = {value}")
        elif command.startswith("scope "):
            prefix = command[len("scope "):].strip()
            session = open_session(
                store,
                session.query,
                SearchScope(
                    method_prefixes=(prefix,) if prefix else (),
                    file_globs=tuple(args.file_glob or ()),
                ),
                include_exception_text=not args.no_exception_text,
            )
            print(f"scope set to method prefix {prefix!r}" if prefix
                  else "scope cleared")
        elif command:
            print(f"unknown command {command!r}", file=sys.stderr)
    return EXIT_OK


def cmd_docs(args: argparse.Namespace) -> int:
    store = load_store(Path(args.trace))
    entries = generate_docs(
        store,
        method_prefix=args.prefix,
        k=args.k,
        constructor_marker=args.constructor_marker,
    )
    source_map = None
    if args.source_map:
        source_map = SourceMap.load(args.source_map, args.source_root)
    if args.format == "json":
        payload = docs_to_payload(entries)
        if source_map is not None:
            report = succinctness_report(entries, source_map)
            for item in payload:
                item["succinctness"] = report.ratios.get(item["method"])
        text = dump_json(payload)
    else:
        text = render_docs_text(entries)
        if source_map is not None:
            report = succinctness_report(entries, source_map)
            text += "\nsuccinctness\n" + render_succinctness_text(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_annotate(args: argparse.Namespace) -> int:
    store = load_store(Path(args.trace))
    ctx = CursorContext(file=args.file, cursor_line=args.cursor)
    annotations = annotate_file(store, ctx, allow_stale=args.allow_stale)
    if args.format == "json":
        print(dump_json(annotations_to_payload(annotations)), end="")
    else:
        source_path = Path(args.source_root) / args.file
        source_text = source_path.read_text(encoding="utf-8")
        print(render_annotated_source(source_text, annotations), end="")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    store = load_store(Path(args.trace))
    problems = store.verify()
    if problems:
        for problem in problems:
            print(f"invalid: {problem}", file=sys.stderr)
        return EXIT_MALFORMED
    print(
        f"ok: {len(store.events)} events, {len(store.activations)} activations, "
        f"{len(store.files())} files"
    )
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServeConfig, create_app

    port = args.port
    env_port = os.environ.get("TRACELENS_PORT")
    if env_port:
        port = int(env_port)
    config = ServeConfig(
        trace_path=Path(args.trace),
        source_root=Path(args.source_root),
        source_map_path=Path(args.source_map) if args.source_map else None,
        port=port,
        allow_stale=args.allow_stale,
        ui_dir=Path(args.ui_dir) if args.ui_dir else None,
        constructor_marker=args.constructor_marker,
    )
    app = create_app(config)
    print(f"serving on http://127.0.0.1:{config.port}", file=sys.stderr)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracelens",
        description="Search, document, and annotate source code with recorded runtime values.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="find a string among recorded runtime values")
    p.add_argument("trace")
    p.add_argument("needle")
    p.add_argument("--method-prefix", action="append",
                   help="limit to methods under this qualified-name prefix (repeatable)")
    p.add_argument("--file-glob", action="append",
                   help="limit to files matching this glob (repeatable)")
    p.add_argument("--ignore-case", action="store_true")
    p.add_argument("--no-exception-text", action="store_true",
                   help="do not search exception messages")
    p.add_argument("--interactive", action="store_true",
                   help="step through matches with n/locals/scope/q commands")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("docs", help="generate example-based method documentation")
    p.add_argument("trace")
    p.add_argument("--prefix", default="", help="only methods under this prefix")
    p.add_argument("-k", type=int, default=DEFAULT_SENTENCE_CAP,
                   help="max sentences per method")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.add_argument("--constructor-marker", default=DEFAULT_CONSTRUCTOR_MARKER,
                   help="final name segment that marks constructors")
    p.add_argument("--source-map",
                   help="method span file; adds the succinctness report")
    p.add_argument("--source-root", default=".",
                   help="root for the source files named in the source map")
    p.set_defaults(func=cmd_docs)

    p = sub.add_parser("annotate", help="per-line sample values for one file")
    p.add_argument("trace")
    p.add_argument("file", help="trace-relative path of the file to annotate")
    p.add_argument("--cursor", type=int, default=1,
                   help="cursor line that selects the displayed iteration")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--allow-stale", action="store_true")
    p.add_argument("--source-root", default=".",
                   help="root for reading the annotated source (text format)")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("serve", help="serve the HTTP API and web UI")
    p.add_argument("trace")
    p.add_argument("--source-root", default=".")
    p.add_argument("--source-map")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--allow-stale", action="store_true")
    p.add_argument("--ui-dir", help="static UI bundle to serve at /")
    p.add_argument("--constructor-marker", default=DEFAULT_CONSTRUCTOR_MARKER)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate", help="parse a trace and check its invariants")
    p.add_argument("trace")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MalformedRecord, NonMonotonicSeq, OrphanEvent) as err:
        print(f"malformed trace: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    except StaleTrace as err:
        print(f"stale trace: {err} (pass --allow-stale to override)", file=sys.stderr)
        return EXIT_STALE
    except FileNotFoundError as err:
        print(f"cannot read {err.filename}: {err.strerror}", file=sys.stderr)
        return EXIT_MALFORMED
    except TraceLensError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
