"""Sidecar configuration: one JSON file, one entry per served task.

    {"models": [
        {"task": "entailment",
         "provider": "transformers",
         "model": "<checkpoint id or local path>",
         "labels": {"0": "contradiction", "1": "neutral", "2": "entailment"},
         "device": "cpu"}
    ]}

``labels`` maps the model's output index onto the protocol label set of the
task and must be a bijection; published checkpoints disagree about label
order, so it is explicit configuration, never inferred. The ``builtin:hash``
provider needs no labels and exists so the protocol machinery can be
exercised without downloading checkpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

TASKS = ("entailment", "otd", "completion")

PROTOCOL_LABELS = {
    "entailment": frozenset({"entailment", "neutral", "contradiction"}),
    "otd": frozenset({"offensive", "non_offensive"}),
    "completion": frozenset(),
}

PROVIDERS = ("transformers", "builtin:hash")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ModelConfig:
    task: str
    model: str
    provider: str = "transformers"
    labels: dict[int, str] = field(default_factory=dict)
    device: str = "cpu"

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if self.provider not in PROVIDERS:
            raise ConfigError(f"unknown provider {self.provider!r}; expected one of {PROVIDERS}")
        expected = PROTOCOL_LABELS[self.task]
        if self.provider == "transformers" and expected:
            got = list(self.labels.values())
            if sorted(got) != sorted(expected) or len(set(self.labels)) != len(expected):
                raise ConfigError(
                    f"labels for task {self.task!r} must map output indices "
                    f"bijectively onto {sorted(expected)}, got {self.labels!r}"
                )
            if sorted(self.labels) != list(range(len(expected))):
                raise ConfigError(
                    f"label indices for task {self.task!r} must be 0..{len(expected) - 1}, "
                    f"got {sorted(self.labels)}"
                )


@dataclass(frozen=True)
class SidecarConfig:
    models: tuple[ModelConfig, ...]

    def for_task(self, task: str) -> ModelConfig | None:
        for model in self.models:
            if model.task == task:
                return model
        return None


def _parse_model(obj: dict) -> ModelConfig:
    if not isinstance(obj, dict):
        raise ConfigError("each model entry must be an object")
    labels_raw = obj.get("labels") or {}
    if not isinstance(labels_raw, dict):
        raise ConfigError("labels must be an object mapping index -> label")
    try:
        labels = {int(k): str(v) for k, v in labels_raw.items()}
    except (TypeError, ValueError):
        raise ConfigError(f"label indices must be integers, got {sorted(labels_raw)}") from None
    config = ModelConfig(
        task=obj.get("task", ""),
        model=str(obj.get("model", "")),
        provider=obj.get("provider", "transformers"),
        labels=labels,
        device=str(obj.get("device", "cpu")),
    )
    config.validate()
    return config


def load_config(path: str | Path) -> SidecarConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    models_raw = obj.get("models")
    if not isinstance(models_raw, list) or not models_raw:
        raise ConfigError(f"{path}: 'models' must be a non-empty list")
    models = tuple(_parse_model(m) for m in models_raw)
    tasks = [m.task for m in models]
    if len(set(tasks)) != len(tasks):
        raise ConfigError(f"{path}: at most one model per task, got {tasks}")
    return SidecarConfig(models=models)
