"""Process entry for the mock backends.

``python -m chain_reasoner.backends.serve_mock --mode hash`` serves on
stdio; ``--listen HOST:PORT`` serves NDJSON over TCP (port 0 picks an
ephemeral port, announced on stderr).
"""

from __future__ import annotations

import argparse
import sys

from .mock import build_mock
from .server import serve_stdio, serve_tcp


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m chain_reasoner.backends.serve_mock",
        description="Serve a deterministic mock backend over the chain-score protocol.",
    )
    parser.add_argument("--mode", choices=("hash", "lexicon"), default="hash")
    parser.add_argument("--blocklist", help="term file for lexicon mode (one per line)")
    parser.add_argument(
        "--listen", metavar="HOST:PORT", help="serve NDJSON over TCP instead of stdio"
    )
    args = parser.parse_args(argv)

    terms: frozenset[str] = frozenset()
    if args.blocklist:
        from ..dataset_io import load_blocklist

        terms = load_blocklist(args.blocklist)
    backend = build_mock(args.mode, terms)

    if args.listen:
        host, _, port = args.listen.rpartition(":")
        serve_tcp(backend, host or "127.0.0.1", int(port))
    else:
        serve_stdio(backend)
    return 0


if __name__ == "__main__":
    sys.exit(main())
