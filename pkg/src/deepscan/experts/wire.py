"""Wire-format codecs shared by the remote client and replay backend.

Protocol (JSON over HTTP):

* POST /v1/search   {image: b64 PNG, question}            -> {width, height, values}
* POST /v1/segment  {image: b64 PNG, point: {x, y}}       -> {width, height, rle}
* POST /v1/detect   {image: b64 PNG, query}               -> {boxes: [{x0,y0,x1,y1}]}
* POST /v1/complete {images, prompt, system, max_tokens, temperature, seed} -> {text}

Masks travel as uncompressed run-length encoding: alternating run lengths
starting with a 0-run, row-major; run sums must equal width*height.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
from typing import Any

import numpy as np
from PIL import Image

from ..errors import ProtocolError
from ..types import BBox


def encode_image_b64(img: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(img, dtype=np.uint8)).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_image_b64(data: str) -> np.ndarray:
    raw = base64.b64decode(data)
    with Image.open(io.BytesIO(raw)) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def rle_encode(mask: np.ndarray) -> list[int]:
    flat = (np.asarray(mask).ravel() != 0).astype(np.int8)
    if flat.size == 0:
        return [0]
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [flat.size]])
    lengths = (ends - starts).tolist()
    # Encoding starts with a 0-run, so prepend an empty one when the mask
    # begins with a set pixel.
    runs = [0] + lengths if int(flat[0]) == 1 else lengths
    return [int(r) for r in runs]


def rle_decode(runs: list[int], width: int, height: int) -> np.ndarray:
    if any((not isinstance(r, int)) or r < 0 for r in runs):
        raise ProtocolError(f"RLE runs must be non-negative integers: {runs[:8]}...")
    total = sum(runs)
    if total != width * height:
        raise ProtocolError(
            f"RLE run sum {total} does not equal width*height {width * height}"
        )
    flat = np.zeros(width * height, dtype=np.uint8)
    pos = 0
    val = 0
    for run in runs:
        if val:
            flat[pos : pos + run] = 1
        pos += run
        val ^= 1
    return flat.reshape(height, width)


# Request builders / response parsers.  The same canonical bodies back both
# the HTTP client and the replay fixtures.


def build_search_request(patch: np.ndarray, question: str) -> dict[str, Any]:
    return {"image": encode_image_b64(patch), "question": question}


def parse_search_response(body: dict[str, Any], expect_hw: tuple[int, int]) -> np.ndarray:
    try:
        w, h = int(body["width"]), int(body["height"])
        values = np.asarray(body["values"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed search response: {exc}") from exc
    if (h, w) != expect_hw:
        raise ProtocolError(f"search map is {w}x{h}, expected {expect_hw[1]}x{expect_hw[0]}")
    if values.size != w * h:
        raise ProtocolError(f"search values length {values.size} != {w * h}")
    if not np.isfinite(values).all() or (values < 0).any():
        raise ProtocolError("search map must be finite and non-negative")
    return values.reshape(h, w)


def build_segment_request(image: np.ndarray, point: tuple[int, int]) -> dict[str, Any]:
    return {
        "image": encode_image_b64(image),
        "point": {"x": int(point[0]), "y": int(point[1])},
    }


def parse_segment_response(body: dict[str, Any], expect_hw: tuple[int, int]) -> np.ndarray:
    try:
        w, h = int(body["width"]), int(body["height"])
        runs = list(body["rle"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed segment response: {exc}") from exc
    if (h, w) != expect_hw:
        raise ProtocolError(f"segment mask is {w}x{h}, expected {expect_hw[1]}x{expect_hw[0]}")
    return rle_decode([int(r) for r in runs], w, h)


def build_detect_request(view: np.ndarray, query: str) -> dict[str, Any]:
    return {"image": encode_image_b64(view), "query": query}


def parse_detect_response(body: dict[str, Any], view_hw: tuple[int, int]) -> list[BBox]:
    try:
        raw = list(body["boxes"])
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed detect response: {exc}") from exc
    boxes = []
    h, w = view_hw
    for item in raw:
        try:
            b = BBox(int(item["x0"]), int(item["y0"]), int(item["x1"]), int(item["y1"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed detect box {item}: {exc}") from exc
        if not (0 <= b.x0 < b.x1 <= w and 0 <= b.y0 < b.y1 <= h):
            raise ProtocolError(f"detect box {b} outside {w}x{h} view")
        boxes.append(b)
    return boxes


def build_complete_request(
    images: list[np.ndarray],
    prompt: str,
    system: str,
    max_tokens: int,
    temperature: float,
    seed: int,
) -> dict[str, Any]:
    return {
        "images": [encode_image_b64(im) for im in images],
        "prompt": prompt,
        "system": system,
        "max_tokens": int(max_tokens),
        "temperature": float(temperature),
        "seed": int(seed),
    }


def parse_complete_response(body: dict[str, Any]) -> str:
    try:
        return str(body["text"])
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed completion response: {exc}") from exc


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def request_key(endpoint: str, body: dict[str, Any]) -> str:
    """Stable fingerprint of a wire request, used to index replay fixtures."""
    digest = hashlib.sha256()
    digest.update(endpoint.encode())
    digest.update(b"\x00")
    digest.update(canonical_json(body).encode())
    return digest.hexdigest()
