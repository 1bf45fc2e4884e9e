"""Wire-protocol conformance probe for adapter servers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import requests

from ..errors import ProtocolError, TransportError
from ..experts import wire
from ..experts.remote import WireClient


@dataclass
class ProbeResult:
    name: str
    ok: bool
    detail: str = ""


def _test_image(size: int = 16) -> np.ndarray:
    rng = np.random.default_rng(7)
    return rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)


def run_serve_check(url: str, timeout_s: float = 30.0) -> list[ProbeResult]:
    client = WireClient(url, timeout_s)
    results: list[ProbeResult] = []
    img = _test_image()
    h, w = img.shape[:2]

    def probe(name, fn):
        try:
            fn()
            results.append(ProbeResult(name, True))
        except (TransportError, ProtocolError, AssertionError) as exc:
            results.append(ProbeResult(name, False, str(exc)))

    probe("health", lambda: client.health())

    def check_search():
        body = wire.build_search_request(img, "test query")
        resp = client.post("/v1/search", body)
        wire.parse_search_response(resp, (h, w))

    probe("search schema", check_search)

    def check_segment():
        body = wire.build_segment_request(img, (w // 2, h // 2))
        resp = client.post("/v1/segment", body)
        mask = wire.parse_segment_response(resp, (h, w))
        assert mask.shape == (h, w), f"mask shape {mask.shape}"
        assert sum(resp["rle"]) == w * h, "RLE run sum mismatch"

    probe("segment rle sum", check_segment)

    def check_detect():
        body = wire.build_detect_request(img, "test query")
        resp = client.post("/v1/detect", body)
        wire.parse_detect_response(resp, (h, w))

    probe("detect schema", check_detect)

    def check_complete():
        body = wire.build_complete_request([img], "Describe.", "system", 16, 0.0, 13)
        resp = client.post("/v1/complete", body)
        text = wire.parse_complete_response(resp)
        assert isinstance(text, str) and text, "empty completion"

    probe("complete schema", check_complete)

    def check_error_shape():
        sess = requests.Session()
        resp = sess.post(f"{url.rstrip('/')}/v1/search", json={"question": "no image"}, timeout=timeout_s)
        assert 400 <= resp.status_code < 500, f"expected 4xx, got {resp.status_code}"
        body = resp.json()
        assert isinstance(body.get("error"), str) and body["error"], f"error shape {body}"

    probe("malformed input error shape", check_error_shape)

    def check_bad_point():
        body = wire.build_segment_request(img, (w + 50, h + 50))
        sess = requests.Session()
        resp = sess.post(f"{url.rstrip('/')}/v1/segment", json=body, timeout=timeout_s)
        assert 400 <= resp.status_code < 500, f"expected 4xx, got {resp.status_code}"
        assert isinstance(resp.json().get("error"), str), "missing error field"

    probe("out-of-range point error shape", check_bad_point)
    return results
