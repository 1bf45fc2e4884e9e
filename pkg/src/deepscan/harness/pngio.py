"""PNG image I/O (the only codec the harness supports)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from ..types import BBox, Raster


def read_png(path: str | Path) -> Raster:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    h, w = arr.shape[:2]
    return Raster(arr, BBox(0, 0, w, h))


def write_png(path: str | Path, image: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(tmp, format="PNG")
    tmp.replace(path)
