"""HTTP client for the expert wire protocol.

Sessions are thread-local so the bundle supports concurrent in-flight
requests without assuming response ordering.
"""

from __future__ import annotations

import os
import threading
from typing import Any

import numpy as np
import requests

from ..config import LvlmConfig
from ..errors import TransportError
from ..types import BBox, Raster, full_region
from . import wire
from .base import ExpertBundle, LvlmOps, Question

ENV_REMOTE_URL = "DEEPSCAN_REMOTE_URL"
DEFAULT_TIMEOUT_S = 60.0


class WireClient:
    def __init__(self, base_url: str, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._local = threading.local()

    def _session(self) -> requests.Session:
        sess = getattr(self._local, "session", None)
        if sess is None:
            sess = requests.Session()
            self._local.session = sess
        return sess

    def post(self, endpoint: str, body: dict[str, Any]) -> dict[str, Any]:
        url = f"{self.base_url}{endpoint}"
        try:
            resp = self._session().post(url, json=body, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise TransportError(f"POST {url} failed: {exc}") from exc
        if resp.status_code != 200:
            detail = ""
            try:
                detail = resp.json().get("error", "")
            except ValueError:
                detail = resp.text[:200]
            raise TransportError(f"POST {url} -> HTTP {resp.status_code}: {detail}")
        try:
            return resp.json()
        except ValueError as exc:
            raise TransportError(f"POST {url}: non-JSON response") from exc

    def health(self) -> dict[str, Any]:
        url = f"{self.base_url}/v1/health"
        try:
            resp = self._session().get(url, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise TransportError(f"GET {url} failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"GET {url} -> HTTP {resp.status_code}")
        return resp.json()


class RemoteSearchExpert:
    def __init__(self, client: WireClient):
        self.client = client

    def search(self, patch: Raster, q: Question) -> np.ndarray:
        body = wire.build_search_request(patch, q.text)
        resp = self.client.post("/v1/search", body)
        return wire.parse_search_response(resp, patch.shape[:2])


class RemoteVisualExpert:
    def __init__(self, client: WireClient):
        self.client = client

    def segment(self, image: Raster, point: tuple[int, int]) -> np.ndarray:
        body = wire.build_segment_request(image, point)
        resp = self.client.post("/v1/segment", body)
        return wire.parse_segment_response(resp, image.shape[:2])

    def detect(self, view: Raster, q: Question) -> list[BBox]:
        body = wire.build_detect_request(view, q.text)
        resp = self.client.post("/v1/detect", body)
        return wire.parse_detect_response(resp, view.shape[:2])


class RemoteLvlmClient:
    def __init__(self, client: WireClient):
        self.client = client

    def complete(self, images, prompt, system, max_tokens, temperature, seed) -> str:
        body = wire.build_complete_request(
            images, prompt, system, max_tokens, temperature, seed
        )
        resp = self.client.post("/v1/complete", body)
        return wire.parse_complete_response(resp)


def remote_bundle(
    base_url: str | None = None,
    lvlm_cfg: LvlmConfig | None = None,
    timeout_s: float = DEFAULT_TIMEOUT_S,
) -> ExpertBundle:
    url = base_url or os.environ.get(ENV_REMOTE_URL)
    if not url:
        raise TransportError(
            f"no remote expert URL given and {ENV_REMOTE_URL} is unset"
        )
    client = WireClient(url, timeout_s)
    return ExpertBundle(
        search_expert=RemoteSearchExpert(client),
        visual=RemoteVisualExpert(client),
        lvlm=LvlmOps(RemoteLvlmClient(client), lvlm_cfg),
    )


def probe_view_region(view: Raster) -> BBox:
    """Region helper for callers that need provenance of a full image."""
    return getattr(view, "region", None) or full_region(view)
