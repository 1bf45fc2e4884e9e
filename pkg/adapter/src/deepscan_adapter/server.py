"""FastAPI application implementing the expert wire protocol.

The server is stateless across requests.  Concurrent /v1/search requests are
opportunistically fused: a collector thread drains the queue after a short
window and issues one batched backend call; callers block on futures, so
batching stays invisible to clients and no response ordering is assumed.
"""

from __future__ import annotations

import base64
import io
import threading
from concurrent.futures import Future

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image
from pydantic import BaseModel, Field

from .backends import ExpertBackend, create_backend
from .config import BackendConfig


class AdapterError(Exception):
    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


class PointModel(BaseModel):
    x: int
    y: int


class SearchRequest(BaseModel):
    image: str
    question: str = Field(min_length=1)


class SegmentRequest(BaseModel):
    image: str
    point: PointModel


class DetectRequest(BaseModel):
    image: str
    query: str = Field(min_length=1)


class CompleteRequest(BaseModel):
    images: list[str]
    prompt: str = Field(min_length=1)
    system: str = ""
    max_tokens: int = Field(default=256, ge=1, le=8192)
    temperature: float = Field(default=0.0, ge=0.0, le=2.0)
    seed: int = 0


def decode_image(data: str, max_pixels: int) -> np.ndarray:
    try:
        raw = base64.b64decode(data, validate=True)
    except Exception as exc:
        raise AdapterError(f"image is not valid base64: {exc}") from exc
    try:
        with Image.open(io.BytesIO(raw)) as im:
            w, h = im.size
            if w * h > max_pixels:
                raise AdapterError(
                    f"image {w}x{h} exceeds the {max_pixels}-pixel limit", status=413
                )
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except AdapterError:
        raise
    except Exception as exc:
        raise AdapterError(f"image payload could not be decoded: {exc}") from exc


def rle_encode(mask: np.ndarray) -> list[int]:
    """Alternating run lengths starting with a 0-run, row-major."""
    flat = (np.asarray(mask).ravel() != 0).astype(np.int8)
    if flat.size == 0:
        return [0]
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [flat.size]])
    lengths = (ends - starts).tolist()
    runs = [0] + lengths if int(flat[0]) == 1 else lengths
    return [int(r) for r in runs]


class SearchBatcher:
    """Collects concurrent search requests into single backend calls."""

    def __init__(self, backend: ExpertBackend, window_s: float, batch_max: int):
        self.backend = backend
        self.window_s = window_s
        self.batch_max = batch_max
        self._lock = threading.Lock()
        self._wakeup = threading.Event()
        self._pending: list[tuple[np.ndarray, str, Future]] = []
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._stop = False
        self._thread.start()

    def submit(self, image: np.ndarray, question: str) -> np.ndarray:
        future: Future = Future()
        with self._lock:
            self._pending.append((image, question, future))
        self._wakeup.set()
        return future.result()

    def shutdown(self) -> None:
        self._stop = True
        self._wakeup.set()

    def _loop(self) -> None:
        while not self._stop:
            self._wakeup.wait()
            if self._stop:
                break
            # Let a burst of concurrent requests accumulate.
            threading.Event().wait(self.window_s)
            with self._lock:
                batch = self._pending[: self.batch_max]
                self._pending = self._pending[self.batch_max :]
                if not self._pending:
                    self._wakeup.clear()
            if not batch:
                continue
            try:
                maps = self.backend.search_batch([(im, q) for im, q, _ in batch])
                for (_, _, future), result in zip(batch, maps):
                    future.set_result(result)
            except Exception as exc:  # propagate to every waiter
                for _, _, future in batch:
                    if not future.done():
                        future.set_exception(exc)


def create_app(cfg: BackendConfig | None = None) -> FastAPI:
    cfg = cfg or BackendConfig()
    backend = create_backend(cfg)  # fail fast on unknown models
    batcher = SearchBatcher(backend, cfg.batch_window_ms / 1000.0, cfg.batch_max)
    app = FastAPI(title="deepscan expert adapter", version="0.1.0")
    app.state.backend = backend
    app.state.batcher = batcher

    @app.exception_handler(AdapterError)
    async def _adapter_error(_req: Request, exc: AdapterError):
        return JSONResponse(status_code=exc.status, content={"error": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors()[:3])})

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "backend": backend.name,
            "device": cfg.device,
            "gradcam_layer": cfg.gradcam_layer,
        }

    @app.post("/v1/search")
    def search(req: SearchRequest):
        image = decode_image(req.image, cfg.max_image_pixels)
        s_map = batcher.submit(image, req.question)
        h, w = s_map.shape
        return {"width": w, "height": h, "values": [float(v) for v in s_map.ravel()]}

    @app.post("/v1/segment")
    def segment(req: SegmentRequest):
        image = decode_image(req.image, cfg.max_image_pixels)
        h, w = image.shape[:2]
        if not (0 <= req.point.x < w and 0 <= req.point.y < h):
            raise AdapterError(f"point ({req.point.x}, {req.point.y}) outside {w}x{h} image")
        mask = backend.segment(image, req.point.x, req.point.y)
        return {"width": w, "height": h, "rle": rle_encode(mask)}

    @app.post("/v1/detect")
    def detect(req: DetectRequest):
        image = decode_image(req.image, cfg.max_image_pixels)
        h, w = image.shape[:2]
        boxes = backend.detect(image, req.query)
        payload = []
        for (x0, y0, x1, y1) in boxes:
            if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
                raise AdapterError(f"backend produced out-of-bounds box {(x0, y0, x1, y1)}", 500)
            payload.append({"x0": x0, "y0": y0, "x1": x1, "y1": y1})
        return {"boxes": payload}

    @app.post("/v1/complete")
    def complete(req: CompleteRequest):
        if len(req.prompt) > cfg.max_prompt_chars:
            raise AdapterError(f"prompt exceeds {cfg.max_prompt_chars} characters", 413)
        images = [decode_image(data, cfg.max_image_pixels) for data in req.images]
        text = backend.complete(
            images, req.prompt, req.system, req.max_tokens, req.temperature, req.seed
        )
        return {"text": text}

    return app
