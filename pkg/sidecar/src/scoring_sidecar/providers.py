"""Model providers behind the serve loop.

A classification provider returns index-ordered raw scores and the serve
layer applies the configured index -> label mapping, then renormalizes; a
completion provider returns text. The transformers provider loads real
checkpoints; builtin:hash is a dependency-free deterministic stand-in used
by the conformance tests.
"""

from __future__ import annotations

import hashlib
import math

from .config import ModelConfig, PROTOCOL_LABELS


class ProviderError(Exception):
    """Model loading or inference failed."""


class HashProvider:
    """Deterministic pseudo-scores from sha256; no model involved."""

    def __init__(self, config: ModelConfig):
        self.n_outputs = max(len(PROTOCOL_LABELS[config.task]), 1)
        # Without an explicit mapping the protocol label sets apply in a
        # fixed documented order.
        self.labels = config.labels or {
            "entailment": {0: "entailment", 1: "neutral", 2: "contradiction"},
            "otd": {0: "offensive", 1: "non_offensive"},
            "completion": {},
        }[config.task]

    def _words(self, key: str, n: int) -> list[float]:
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return [int.from_bytes(digest[8 * i : 8 * (i + 1)], "big") + 1.0 for i in range(n)]

    def classify(self, text: str, text_pair: str | None = None) -> list[float]:
        key = text if text_pair is None else text + "\x1f" + text_pair
        return self._words(key, self.n_outputs)

    def generate(self, prompt: str) -> str:
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        return f"Because {digest[:12]}."


class TransformersProvider:
    """Sequence classification / causal generation via HuggingFace models."""

    def __init__(self, config: ModelConfig):
        self.config = config
        self.labels = dict(config.labels)
        try:
            if config.task == "completion":
                from transformers import pipeline

                self._generator = pipeline(
                    "text-generation", model=config.model, device=config.device
                )
                self._model = None
            else:
                import torch
                from transformers import AutoModelForSequenceClassification, AutoTokenizer

                self._torch = torch
                self._tokenizer = AutoTokenizer.from_pretrained(config.model)
                self._model = AutoModelForSequenceClassification.from_pretrained(config.model)
                self._model.to(config.device)
                self._model.eval()
        except Exception as exc:
            raise ProviderError(f"failed to load {config.model!r}: {exc}") from exc

    def classify(self, text: str, text_pair: str | None = None) -> list[float]:
        try:
            with self._torch.no_grad():
                if text_pair is None:
                    encoded = self._tokenizer(text, return_tensors="pt", truncation=True)
                else:
                    encoded = self._tokenizer(
                        text, text_pair, return_tensors="pt", truncation=True
                    )
                encoded = {k: v.to(self.config.device) for k, v in encoded.items()}
                logits = self._model(**encoded).logits[0]
                return self._torch.softmax(logits, dim=-1).tolist()
        except Exception as exc:
            raise ProviderError(f"inference failed: {exc}") from exc

    def generate(self, prompt: str) -> str:
        try:
            [result] = self._generator(prompt, max_new_tokens=48, do_sample=False)
            text = result["generated_text"]
            return text[len(prompt) :] if text.startswith(prompt) else text
        except Exception as exc:
            raise ProviderError(f"generation failed: {exc}") from exc


def build_provider(config: ModelConfig):
    if config.provider == "builtin:hash":
        return HashProvider(config)
    return TransformersProvider(config)


def normalize(raw: list[float]) -> list[float]:
    """Clamp to [0, inf) and renormalize so emitted labels sum to 1."""
    clipped = [x if x > 0.0 and math.isfinite(x) else 0.0 for x in raw]
    total = math.fsum(clipped)
    if total <= 0.0:
        raise ProviderError(f"model produced no usable probability mass: {raw!r}")
    return [x / total for x in clipped]
