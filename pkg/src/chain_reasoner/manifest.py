"""Run manifests: what ran, on which bytes, against which backends."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .backends.protocol import PROTOCOL_NAME


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    command: str
    argv: tuple[str, ...]
    corpus_path: str | None = None
    corpus_sha256: str | None = None
    backends: dict[str, str] = field(default_factory=dict)
    variant: str | None = None
    seed: int | None = None
    parallel: int = 1
    protocol: str = PROTOCOL_NAME
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "argv": list(self.argv),
            "corpus_path": self.corpus_path,
            "corpus_sha256": self.corpus_sha256,
            "backends": dict(self.backends),
            "variant": self.variant,
            "seed": self.seed,
            "parallel": self.parallel,
            "protocol": self.protocol,
            "created_at": self.created_at,
        }


def build_manifest(
    command: str,
    argv: list[str] | tuple[str, ...],
    corpus_path: str | Path | None = None,
    backends: dict[str, str] | None = None,
    variant: str | None = None,
    seed: int | None = None,
    parallel: int = 1,
) -> RunManifest:
    return RunManifest(
        command=command,
        argv=tuple(argv),
        corpus_path=str(corpus_path) if corpus_path is not None else None,
        corpus_sha256=file_sha256(corpus_path) if corpus_path is not None else None,
        backends=backends or {},
        variant=variant,
        seed=seed,
        parallel=parallel,
        created_at=datetime.now(timezone.utc).isoformat(),
    )


def write_manifest(manifest: RunManifest, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
