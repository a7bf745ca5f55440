"""Transport clients speaking the chain-score protocol.

Two transports carry the same message bodies: a spawned child process
(requests on its stdin, responses on its stdout) and a TCP connection.
Transport failures (spawn error, EOF, timeout) are retried once by
reconnecting and re-sending; scoring errors reported by the backend are
never retried. A client handle is shareable across threads: calls are
serialized by an internal lock, and responses are matched by id so arrival
order never matters.
"""

from __future__ import annotations

import queue
import shlex
import socket
import subprocess
import threading
from typing import Callable, Sequence

from ..errors import ProtocolError, ScoringError, TransportError
from .protocol import (
    EntailmentScores,
    OtdScores,
    ScoreRequest,
    ScoreResponse,
    decode_line,
    encode_line,
    parse_handshake,
    request_to_dict,
    response_from_dict,
)

_EOF = object()

DEFAULT_TIMEOUT = 30.0


class _LineClient:
    """Shared request/response machinery over a line transport."""

    def __init__(self, identity: str, timeout: float = DEFAULT_TIMEOUT):
        self.identity = identity
        self.timeout = timeout
        self.protocol: str | None = None
        self._lock = threading.Lock()
        self._counter = 0
        self._queue: queue.Queue = queue.Queue()
        self._connected = False
        self._pending: dict[str, ScoreResponse] = {}
        self._outstanding: set[str] = set()

    # -- transport hooks -------------------------------------------------
    def _open(self) -> None:
        raise NotImplementedError

    def _teardown(self) -> None:
        raise NotImplementedError

    def _send_line(self, line: str) -> None:
        raise NotImplementedError

    # ---------------------------------------------------------------------
    def _start_reader(self, lines) -> None:
        def pump():
            try:
                for line in lines:
                    self._queue.put(line)
            except Exception:
                pass
            finally:
                self._queue.put(_EOF)

        threading.Thread(target=pump, daemon=True).start()

    def _recv_line(self) -> str:
        try:
            item = self._queue.get(timeout=self.timeout)
        except queue.Empty:
            raise TransportError(f"{self.identity}: timed out after {self.timeout}s") from None
        if item is _EOF:
            raise TransportError(f"{self.identity}: backend closed its output")
        return item

    def _ensure_connected(self) -> None:
        if self._connected:
            return
        self._queue = queue.Queue()
        self._pending = {}
        self._outstanding = set()
        self._open()
        self.protocol = parse_handshake(self._recv_line())
        self._connected = True

    def _reset(self) -> None:
        try:
            self._teardown()
        finally:
            self._connected = False

    def _next_id(self) -> str:
        self._counter += 1
        return str(self._counter)

    def _await_response(self, want_id: str) -> ScoreResponse:
        if want_id in self._pending:
            self._outstanding.discard(want_id)
            return self._pending.pop(want_id)
        while True:
            resp = response_from_dict(decode_line(self._recv_line()))
            if resp.id == want_id:
                self._outstanding.discard(want_id)
                return resp
            if resp.id not in self._outstanding:
                raise ProtocolError(f"{self.identity}: unsolicited response id {resp.id!r}")
            self._outstanding.discard(resp.id)
            self._pending[resp.id] = resp

    def _transact(self, make_requests: Callable[[], list[ScoreRequest]]) -> list[ScoreResponse]:
        """Send a request group, collect all responses; one reconnect retry."""
        with self._lock:
            last_error: TransportError | None = None
            for attempt in (0, 1):
                try:
                    self._ensure_connected()
                    requests = make_requests()
                    for req in requests:
                        self._outstanding.add(req.id)
                    for req in requests:
                        self._send_line(encode_line(request_to_dict(req)))
                    return [self._await_response(req.id) for req in requests]
                except TransportError as exc:
                    last_error = exc
                    self._reset()
            raise last_error

    # -- public backend interface ----------------------------------------
    def score_entailment(self, premise: str, hypothesis: str) -> EntailmentScores:
        [resp] = self._transact(
            lambda: [
                ScoreRequest(
                    id=self._next_id(), kind="entailment", premise=premise, hypothesis=hypothesis
                )
            ]
        )
        return self._expect(resp, EntailmentScores)

    def score_otd(self, text: str) -> OtdScores:
        [resp] = self._transact(
            lambda: [ScoreRequest(id=self._next_id(), kind="otd", text=text)]
        )
        return self._expect(resp, OtdScores)

    def complete(self, prompt: str) -> str:
        [resp] = self._transact(
            lambda: [ScoreRequest(id=self._next_id(), kind="completion", prompt=prompt)]
        )
        if resp.error is not None:
            raise ScoringError(f"{self.identity}: {resp.error}")
        if resp.completion is None:
            raise ProtocolError(f"{self.identity}: expected a completion response")
        return resp.completion

    def batch(self, requests: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        if not requests:
            return []
        return self._transact(lambda: list(requests))

    def _expect(self, resp: ScoreResponse, cls) -> EntailmentScores | OtdScores:
        if resp.error is not None:
            raise ScoringError(f"{self.identity}: {resp.error}")
        if not isinstance(resp.scores, cls):
            raise ProtocolError(f"{self.identity}: expected {cls.__name__} in response")
        return resp.scores

    def close(self) -> None:
        with self._lock:
            self._reset()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ProcessBackend(_LineClient):
    """Spawn a backend child process and talk NDJSON over its std streams."""

    def __init__(self, argv: Sequence[str], timeout: float = DEFAULT_TIMEOUT, identity: str | None = None):
        super().__init__(identity or "cmd:" + " ".join(argv), timeout)
        self.argv = list(argv)
        self._proc: subprocess.Popen | None = None

    def _open(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"{self.identity}: failed to spawn: {exc}") from None
        self._start_reader(self._proc.stdout)

    def _teardown(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.wait(timeout=2)
        except Exception:
            proc.kill()
            proc.wait()

    def _send_line(self, line: str) -> None:
        if self._proc is None or self._proc.stdin is None:
            raise TransportError(f"{self.identity}: process not running")
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"{self.identity}: write failed: {exc}") from None


class TcpBackend(_LineClient):
    """Connect to a backend serving NDJSON on a TCP address."""

    def __init__(self, host: str, port: int, timeout: float = DEFAULT_TIMEOUT, identity: str | None = None):
        super().__init__(identity or f"url:{host}:{port}", timeout)
        self.host = host
        self.port = port
        self._sock: socket.socket | None = None

    def _open(self) -> None:
        try:
            self._sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
        except OSError as exc:
            raise TransportError(f"{self.identity}: connect failed: {exc}") from None
        reader = self._sock.makefile("r", encoding="utf-8")
        self._start_reader(reader)

    def _teardown(self) -> None:
        sock, self._sock = self._sock, None
        if sock is not None:
            try:
                sock.close()
            except OSError:
                pass

    def _send_line(self, line: str) -> None:
        if self._sock is None:
            raise TransportError(f"{self.identity}: not connected")
        try:
            self._sock.sendall((line + "\n").encode("utf-8"))
        except OSError as exc:
            raise TransportError(f"{self.identity}: send failed: {exc}") from None


def parse_backend_spec(spec: str, timeout: float = DEFAULT_TIMEOUT):
    """Build a transport client from a ``cmd:<argv>`` or ``url:HOST:PORT`` spec."""
    if spec.startswith("cmd:"):
        argv = shlex.split(spec[len("cmd:") :])
        if not argv:
            raise ValueError("cmd: backend spec has no command")
        return ProcessBackend(argv, timeout=timeout, identity=spec)
    if spec.startswith("url:"):
        address = spec[len("url:") :]
        host, sep, port = address.rpartition(":")
        if not sep or not port.isdigit():
            raise ValueError(f"url: backend spec must be url:HOST:PORT, got {spec!r}")
        return TcpBackend(host or "127.0.0.1", int(port), timeout=timeout, identity=spec)
    raise ValueError(f"backend spec must start with 'cmd:' or 'url:', got {spec!r}")
