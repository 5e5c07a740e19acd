"""The tracelens-trace command: run a Python script and record its trace.

    tracelens-trace --out trace.jsonl [--include P]... [--exclude P]...
                    [--live host:port] [--root DIR] [--max-repr N]
                    -- script.py [args...]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .tracer import TracerConfig, run_traced


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracelens-trace", description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("trace.jsonl"),
                        help="trace file to write (also the live-mode fallback)")
    parser.add_argument("--include", action="append", default=[],
                        help="trace only modules under this name prefix (repeatable)")
    parser.add_argument("--exclude", action="append", default=[],
                        help="never trace modules under this name prefix (repeatable)")
    parser.add_argument("--live", metavar="HOST:PORT",
                        help="stream events to a listening core instead of a file")
    parser.add_argument("--root", type=Path, default=None,
                        help="only files under this directory are traced "
                             "(default: current directory)")
    parser.add_argument("--max-repr", type=int, default=120,
                        help="truncate value representations to this length")
    parser.add_argument("command", nargs=argparse.REMAINDER,
                        help="-- script.py [args...]")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = list(args.command)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        print("no command given; expected: -- script.py [args...]", file=sys.stderr)
        return 2
    live_addr = None
    if args.live:
        host, _, port_text = args.live.rpartition(":")
        try:
            live_addr = (host or "127.0.0.1", int(port_text))
        except ValueError:
            print(f"bad --live address {args.live!r}", file=sys.stderr)
            return 2
    try:
        config = TracerConfig(
            output=args.out,
            live_addr=live_addr,
            include=tuple(args.include),
            exclude=tuple(args.exclude),
            root=(args.root or Path.cwd()),
            max_repr_len=args.max_repr,
        )
    except ValueError as err:
        print(f"bad configuration: {err}", file=sys.stderr)
        return 2
    return run_traced(command, config)


if __name__ == "__main__":
    sys.exit(main())
