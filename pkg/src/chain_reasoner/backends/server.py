"""Serve loop turning any in-process backend into a protocol-speaking process."""

from __future__ import annotations

import socket
import sys
from typing import Callable, Iterable

from ..errors import ProtocolError
from .ops import dispatch_one
from .protocol import (
    HANDSHAKE_LINE,
    decode_line,
    encode_line,
    request_from_dict,
    response_to_dict,
)


def serve_lines(backend, lines: Iterable[str], write_line: Callable[[str], None]) -> None:
    """Handshake, then answer each request line with exactly one response line.

    A malformed line gets an error response echoing its id when one is
    parseable (else id ""); unexpected per-request failures become error
    responses too, and the loop keeps serving.
    """
    write_line(HANDSHAKE_LINE)
    for line in lines:
        if not line.strip():
            continue
        req_id = ""
        try:
            obj = decode_line(line)
            if isinstance(obj.get("id"), str):
                req_id = obj["id"]
            req = request_from_dict(obj)
        except ProtocolError as exc:
            write_line(encode_line({"id": req_id, "error": str(exc)}))
            continue
        try:
            resp = dispatch_one(backend, req)
            payload = response_to_dict(resp)
        except Exception as exc:  # a backend bug must not kill the loop
            payload = {"id": req.id, "error": f"internal error: {exc}"}
        write_line(encode_line(payload))


def serve_stdio(backend) -> None:
    out = sys.stdout

    def write_line(line: str) -> None:
        out.write(line + "\n")
        out.flush()

    serve_lines(backend, sys.stdin, write_line)


def serve_tcp(backend, host: str, port: int) -> None:
    """Accept connections sequentially; each gets its own handshake + loop."""
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as srv:
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind((host, port))
        srv.listen(1)
        # Port may have been 0 (ephemeral); announce the bound address on stderr.
        print(f"listening on {srv.getsockname()[0]}:{srv.getsockname()[1]}", file=sys.stderr, flush=True)
        while True:
            conn, _ = srv.accept()
            with conn, conn.makefile("r", encoding="utf-8") as reader:

                def write_line(line: str) -> None:
                    conn.sendall((line + "\n").encode("utf-8"))

                try:
                    serve_lines(backend, reader, write_line)
                except (BrokenPipeError, ConnectionResetError):
                    pass
