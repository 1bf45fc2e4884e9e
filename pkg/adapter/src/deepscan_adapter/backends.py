"""Model backends behind the wire protocol.

A backend supplies four capabilities; `search_batch` takes a list so the
server can fuse concurrent attention requests into one model call.  The stub
backend is deterministic and model-free: it exists for conformance testing
and end-to-end plumbing, and its outputs are shaped so a grounding pipeline
completes a full run against it (a salient blob, a point-centered mask, one
detection, affirmative judgments).
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from .config import BackendConfig


class ExpertBackend(Protocol):
    name: str

    def search_batch(self, items: list[tuple[np.ndarray, str]]) -> list[np.ndarray]: ...

    def segment(self, image: np.ndarray, x: int, y: int) -> np.ndarray: ...

    def detect(self, image: np.ndarray, query: str) -> list[tuple[int, int, int, int]]: ...

    def complete(
        self,
        images: list[np.ndarray],
        prompt: str,
        system: str,
        max_tokens: int,
        temperature: float,
        seed: int,
    ) -> str: ...


class StubBackend:
    name = "stub"

    def __init__(self, cfg: BackendConfig):
        self.cfg = cfg
        self.search_batch_calls = 0  # exposed for batching tests

    def search_batch(self, items):
        self.search_batch_calls += 1
        out = []
        for image, _query in items:
            h, w = image.shape[:2]
            cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
            sigma = max(min(h, w) / 8.0, 1.0)
            ys = np.arange(h, dtype=np.float64)[:, None] - cy
            xs = np.arange(w, dtype=np.float64)[None, :] - cx
            out.append(np.exp(-(ys**2 + xs**2) / (2.0 * sigma * sigma)))
        return out

    def segment(self, image, x, y):
        h, w = image.shape[:2]
        r = max(min(h, w) // 6, 2)
        ys = np.arange(h)[:, None] - y
        xs = np.arange(w)[None, :] - x
        return ((ys**2 + xs**2) <= r * r).astype(np.uint8)

    def detect(self, image, query):
        h, w = image.shape[:2]
        return [(w // 3, h // 3, max(2 * w // 3, w // 3 + 1), max(2 * h // 3, h // 3 + 1))]

    def complete(self, images, prompt, system, max_tokens, temperature, seed):
        if prompt.startswith("Task: List objects mentioned"):
            return '["object of interest"]'
        if "**Yes** or **No**" in prompt:
            return "**Yes**, the region appears to hold the queried content."
        return "A. stub answer"


_REGISTRY = {"stub": StubBackend}


def create_backend(cfg: BackendConfig) -> ExpertBackend:
    try:
        factory = _REGISTRY[cfg.backend]
    except KeyError:
        raise ValueError(
            f"unknown backend {cfg.backend!r}; available: {sorted(_REGISTRY)}"
        ) from None
    return factory(cfg)


def register_backend(name: str, factory) -> None:
    """Extension point for real model backends (attention, segmenter, LVLM)."""
    _REGISTRY[name] = factory
