"""Live pause protocol over a local socket, newline-delimited JSON.

Tracer side (LiveWriter): streams events and, in the default streaming
mode, reads one reply per event — ``{"cmd": "continue"}`` or
``{"cmd": "pause"}``.  On pause it blocks the target thread where it
stands, sends ``{"paused": <seq>, "locals": [[var, repr], ...]}`` and
waits for ``{"cmd": "resume"}`` (back to streaming) or ``{"cmd": "step"}``
(run unreplied to the next line event of this connection, pause again).

Core side (LiveController): listens, matches a needle against the string
values of incoming events the same way a search over the trace file would,
and exposes resume/step to drive the paused target.

Live mode serves one single-threaded target per connection; multi-thread
programs should record to a file instead.  When the socket drops, the
tracer resumes the target and falls back to file output.
"""

from __future__ import annotations

import json
import queue
import socket
import threading
from typing import Any

from .tracer import bounded_str


class LiveWriter:
    """Socket-backed writer implementing the tracer half of the protocol."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._rfile = sock.makefile("r", encoding="utf-8")
        self._wfile = sock.makefile("w", encoding="utf-8", buffering=1)
        self._stepping = False

    @classmethod
    def connect(cls, addr: tuple[str, int]) -> "LiveWriter":
        return cls(socket.create_connection(addr, timeout=30))

    def _send(self, text: str) -> None:
        self._wfile.write(text + "\n")
        self._wfile.flush()

    def _recv(self) -> dict:
        line = self._rfile.readline()
        if not line:
            raise OSError("live socket closed")
        return json.loads(line)

    def emit(self, record: dict, line: str, tracer: Any, frame: Any) -> None:
        self._send(line)
        if self._stepping:
            if record["kind"] == "line":
                self._pause(record["seq"], tracer, frame)
            return
        reply = self._recv()
        if reply.get("cmd") == "pause":
            self._pause(record["seq"], tracer, frame)

    def _pause(self, seq: int, tracer: Any, frame: Any) -> None:
        limit = tracer.config.max_repr_len
        pairs = sorted(
            (name, bounded_str(value, limit))
            for name, value in frame.f_locals.items()
        )
        self._send(json.dumps(
            {"paused": seq, "locals": [[n, v] for n, v in pairs]},
            ensure_ascii=False,
        ))
        while True:
            cmd = self._recv().get("cmd")
            if cmd == "resume":
                self._stepping = False
                return
            if cmd == "step":
                self._stepping = True
                return
            # unknown commands are ignored; the target stays paused

    def close(self) -> None:
        try:
            self._wfile.flush()
        finally:
            self._sock.close()


def _string_values(record: dict) -> list[str]:
    kind = record.get("kind")
    if kind == "call":
        return [a["repr"] for a in record.get("args", ()) if a.get("is_string")]
    if kind == "return":
        ret = record.get("ret")
        return [ret["repr"]] if ret and ret.get("is_string") else []
    if kind == "exception":
        return [record.get("msg", "")]
    if kind == "bind":
        return [record["repr"]] if record.get("is_string") else []
    return []


class LiveController:
    """Core half of the protocol: match a needle, then drive pause/step/resume.

    Usage: construct (binds an ephemeral port), start :meth:`serve` in a
    thread, connect a tracer to ``("127.0.0.1", controller.port)``, then
    take pause notifications from :attr:`pauses` and call :meth:`step` or
    :meth:`resume`.
    """

    def __init__(self, needle: str | None = None, host: str = "127.0.0.1",
                 port: int = 0, pause_once: bool = True):
        self.needle = needle
        self.pause_once = pause_once
        self.events: list[dict] = []
        self.pauses: "queue.Queue[dict]" = queue.Queue()
        self.match_seq: int | None = None
        self._paused_before = False
        self._mode = "stream"
        self._write_lock = threading.Lock()
        self._wfile = None
        self._server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._server.bind((host, port))
        self._server.listen(1)
        self.port = self._server.getsockname()[1]

    def _reply(self, payload: dict) -> None:
        with self._write_lock:
            self._wfile.write(json.dumps(payload) + "\n")
            self._wfile.flush()

    def _should_pause(self, record: dict) -> bool:
        if self.needle is None or (self.pause_once and self._paused_before):
            return False
        return any(self.needle in text for text in _string_values(record))

    def serve(self, timeout: float = 30.0) -> None:
        """Accept one tracer connection and run it to EOF."""
        self._server.settimeout(timeout)
        conn, _ = self._server.accept()
        conn.settimeout(timeout)
        rfile = conn.makefile("r", encoding="utf-8")
        self._wfile = conn.makefile("w", encoding="utf-8", buffering=1)
        try:
            for raw in rfile:
                message = json.loads(raw)
                if "paused" in message:
                    self._mode = "paused"
                    self.pauses.put(message)
                    continue
                self.events.append(message)
                if self._mode == "stream":
                    if self._should_pause(message):
                        self._paused_before = True
                        self.match_seq = message["seq"]
                        self._reply({"cmd": "pause"})
                    else:
                        self._reply({"cmd": "continue"})
        finally:
            conn.close()
            self._server.close()

    def resume(self) -> None:
        self._mode = "stream"
        self._reply({"cmd": "resume"})

    def step(self) -> None:
        self._mode = "stepping"
        self._reply({"cmd": "step"})
