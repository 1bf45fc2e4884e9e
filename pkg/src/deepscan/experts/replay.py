"""Record/replay backend over the wire protocol.

Each recorded exchange is one JSON file named by the request fingerprint:
{"endpoint": ..., "request": <wire body>, "response": <wire body>}.  Replay
canonicalizes requests exactly like the HTTP client would, so fixtures made
against any backend (including a live adapter server) stay bit-comparable.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ..config import LvlmConfig
from ..errors import TransportError
from ..types import BBox, Raster
from . import wire
from .base import ExpertBundle, LvlmOps, Question


class FixtureStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def load(self, endpoint: str, body: dict[str, Any]) -> dict[str, Any]:
        key = wire.request_key(endpoint, body)
        path = self.root / f"{key}.json"
        if not path.exists():
            raise TransportError(f"no replay fixture for {endpoint} (key {key[:12]}...)")
        with path.open() as fh:
            return json.load(fh)["response"]

    def save(self, endpoint: str, body: dict[str, Any], response: dict[str, Any]) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        key = wire.request_key(endpoint, body)
        path = self.root / f"{key}.json"
        tmp = path.with_suffix(".tmp")
        with tmp.open("w") as fh:
            json.dump(
                {"endpoint": endpoint, "request": body, "response": response},
                fh,
                sort_keys=True,
            )
        tmp.replace(path)
        return path


class ReplaySearchExpert:
    def __init__(self, store: FixtureStore):
        self.store = store

    def search(self, patch: Raster, q: Question) -> np.ndarray:
        body = wire.build_search_request(patch, q.text)
        return wire.parse_search_response(self.store.load("/v1/search", body), patch.shape[:2])


class ReplayVisualExpert:
    def __init__(self, store: FixtureStore):
        self.store = store

    def segment(self, image: Raster, point: tuple[int, int]) -> np.ndarray:
        body = wire.build_segment_request(image, point)
        return wire.parse_segment_response(self.store.load("/v1/segment", body), image.shape[:2])

    def detect(self, view: Raster, q: Question) -> list[BBox]:
        body = wire.build_detect_request(view, q.text)
        return wire.parse_detect_response(self.store.load("/v1/detect", body), view.shape[:2])


class ReplayLvlmClient:
    def __init__(self, store: FixtureStore):
        self.store = store

    def complete(self, images, prompt, system, max_tokens, temperature, seed) -> str:
        body = wire.build_complete_request(images, prompt, system, max_tokens, temperature, seed)
        return wire.parse_complete_response(self.store.load("/v1/complete", body))


def replay_bundle(fixture_dir: str | Path, lvlm_cfg: LvlmConfig | None = None) -> ExpertBundle:
    store = FixtureStore(fixture_dir)
    return ExpertBundle(
        search_expert=ReplaySearchExpert(store),
        visual=ReplayVisualExpert(store),
        lvlm=LvlmOps(ReplayLvlmClient(store), lvlm_cfg),
    )


class RecordingSearchExpert:
    def __init__(self, inner, store: FixtureStore):
        self.inner = inner
        self.store = store

    def search(self, patch: Raster, q: Question) -> np.ndarray:
        result = self.inner.search(patch, q)
        h, w = result.shape
        self.store.save(
            "/v1/search",
            wire.build_search_request(patch, q.text),
            {"width": w, "height": h, "values": [float(v) for v in result.ravel()]},
        )
        return result


class RecordingVisualExpert:
    def __init__(self, inner, store: FixtureStore):
        self.inner = inner
        self.store = store

    def segment(self, image: Raster, point: tuple[int, int]) -> np.ndarray:
        mask = self.inner.segment(image, point)
        h, w = mask.shape
        self.store.save(
            "/v1/segment",
            wire.build_segment_request(image, point),
            {"width": w, "height": h, "rle": wire.rle_encode(mask)},
        )
        return mask

    def detect(self, view: Raster, q: Question) -> list[BBox]:
        boxes = self.inner.detect(view, q)
        self.store.save(
            "/v1/detect",
            wire.build_detect_request(view, q.text),
            {"boxes": [{"x0": b.x0, "y0": b.y0, "x1": b.x1, "y1": b.y1} for b in boxes]},
        )
        return boxes


class RecordingLvlmClient:
    def __init__(self, inner_ops: LvlmOps, store: FixtureStore):
        self.inner = inner_ops.client
        self.store = store

    def complete(self, images, prompt, system, max_tokens, temperature, seed) -> str:
        text = self.inner.complete(images, prompt, system, max_tokens, temperature, seed)
        self.store.save(
            "/v1/complete",
            wire.build_complete_request(images, prompt, system, max_tokens, temperature, seed),
            {"text": text},
        )
        return text


def recording_bundle(inner: ExpertBundle, fixture_dir: str | Path) -> ExpertBundle:
    """Wrap a bundle so every exchange is captured as a replay fixture."""
    store = FixtureStore(fixture_dir)
    return ExpertBundle(
        search_expert=RecordingSearchExpert(inner.search_expert, store),
        visual=RecordingVisualExpert(inner.visual, store),
        lvlm=LvlmOps(RecordingLvlmClient(inner.lvlm, store), inner.lvlm.cfg),
    )
