"""Conformance tests against the ASGI app (no network)."""

import base64
import io
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from deepscan_adapter.config import BackendConfig
from deepscan_adapter.server import create_app, rle_encode


def b64_png(arr: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(arr.astype(np.uint8)).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


@pytest.fixture(scope="module")
def client():
    app = create_app(BackendConfig(max_image_pixels=512 * 512))
    with TestClient(app) as tc:
        yield tc


@pytest.fixture()
def img64():
    rng = np.random.default_rng(0)
    return rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)


class TestHealth:
    def test_health(self, client):
        resp = client.get("/v1/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok" and body["backend"] == "stub"
        assert "gradcam_layer" in body


class TestSearch:
    def test_schema_and_dims(self, client, img64):
        resp = client.post("/v1/search", json={"image": b64_png(img64), "question": "q"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["width"] == 64 and body["height"] == 64
        values = np.asarray(body["values"])
        assert values.size == 64 * 64
        assert np.isfinite(values).all() and (values >= 0).all()

    def test_deterministic(self, client, img64):
        payload = {"image": b64_png(img64), "question": "q"}
        a = client.post("/v1/search", json=payload).json()
        b = client.post("/v1/search", json=payload).json()
        assert a == b

    def test_missing_field_error_shape(self, client):
        resp = client.post("/v1/search", json={"question": "no image"})
        assert resp.status_code == 400
        assert isinstance(resp.json()["error"], str)

    def test_garbage_image_rejected(self, client):
        resp = client.post("/v1/search", json={"image": "not-base64!!", "question": "q"})
        assert resp.status_code == 400
        assert "error" in resp.json()


class TestSegment:
    def test_rle_sums_to_area(self, client, img64):
        resp = client.post(
            "/v1/segment", json={"image": b64_png(img64), "point": {"x": 32, "y": 32}}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert sum(body["rle"]) == 64 * 64
        assert body["width"] == 64 and body["height"] == 64

    def test_point_out_of_range(self, client, img64):
        resp = client.post(
            "/v1/segment", json={"image": b64_png(img64), "point": {"x": 500, "y": 2}}
        )
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_rle_encode_empty_and_full(self):
        assert rle_encode(np.zeros((2, 3), np.uint8)) == [6]
        assert rle_encode(np.ones((2, 3), np.uint8)) == [0, 6]


class TestDetect:
    def test_boxes_within_bounds(self, client, img64):
        resp = client.post("/v1/detect", json={"image": b64_png(img64), "query": "thing"})
        assert resp.status_code == 200
        for box in resp.json()["boxes"]:
            assert 0 <= box["x0"] < box["x1"] <= 64
            assert 0 <= box["y0"] < box["y1"] <= 64


class TestComplete:
    def test_text_response(self, client, img64):
        resp = client.post(
            "/v1/complete",
            json={
                "images": [b64_png(img64)],
                "prompt": "Describe the image.",
                "system": "sys",
                "max_tokens": 32,
                "temperature": 0.0,
                "seed": 13,
            },
        )
        assert resp.status_code == 200
        assert isinstance(resp.json()["text"], str)

    def test_judgment_prompt_yields_parseable_yes(self, client, img64):
        resp = client.post(
            "/v1/complete",
            json={
                "images": [b64_png(img64)],
                "prompt": "please answer with **Yes** or **No**: is it there?",
                "max_tokens": 16,
            },
        )
        assert resp.json()["text"].lower().lstrip("*").startswith("yes")


class TestLimits:
    def test_oversized_image_413(self, client):
        big = np.zeros((600, 600, 3), np.uint8)  # over the 512*512 test limit
        resp = client.post("/v1/search", json={"image": b64_png(big), "question": "q"})
        assert resp.status_code == 413
        assert "error" in resp.json()

    def test_oversized_prompt_413(self, client, img64):
        resp = client.post(
            "/v1/complete",
            json={"images": [], "prompt": "x" * 40_000, "max_tokens": 8},
        )
        assert resp.status_code == 413


class TestBatching:
    def test_concurrent_searches_fuse(self, img64):
        app = create_app(BackendConfig(batch_window_ms=30, batch_max=16))
        backend = app.state.backend
        with TestClient(app) as tc:
            payload = {"image": b64_png(img64), "question": "q"}
            tc.post("/v1/search", json=payload)  # warm path
            before = backend.search_batch_calls
            results = []

            def hit():
                results.append(tc.post("/v1/search", json=payload).status_code)

            threads = [threading.Thread(target=hit) for _ in range(8)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert results == [200] * 8
            fused_calls = backend.search_batch_calls - before
            assert fused_calls < 8  # at least some requests shared a batch
