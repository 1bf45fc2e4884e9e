"""Evidence overlay rendering: pure side output, never feeds back into runs."""

from __future__ import annotations

import numpy as np

from ..reasoning import RunTrace
from ..types import BBox

EVIDENCE_COLOR = (60, 120, 255)
TIGHT_COLOR = (40, 220, 220)
VIEW_COLOR = (60, 220, 80)
GT_COLOR = (245, 245, 245)


def _draw_rect(img: np.ndarray, box: BBox, color, thickness: int = 3) -> None:
    h, w = img.shape[:2]
    x0, y0 = max(box.x0, 0), max(box.y0, 0)
    x1, y1 = min(box.x1, w), min(box.y1, h)
    if x0 >= x1 or y0 >= y1:
        return
    t = thickness
    col = np.array(color, dtype=np.uint8)
    img[y0 : min(y0 + t, y1), x0:x1] = col
    img[max(y1 - t, y0) : y1, x0:x1] = col
    img[y0:y1, x0 : min(x0 + t, x1)] = col
    img[y0:y1, max(x1 - t, x0) : x1] = col


def draw_overlay(image: np.ndarray, trace: RunTrace, gt_bbox: BBox | None = None) -> np.ndarray:
    out = np.array(image, copy=True)
    for cand in trace.scan.get("candidates", []):
        if cand.get("affirmed"):
            _draw_rect(out, BBox(*cand["bbox"]), EVIDENCE_COLOR)
            _draw_rect(out, BBox(*cand["tight_bbox"]), TIGHT_COLOR, thickness=2)
    if trace.refocus:
        chosen = trace.refocus.get("chosen")
        for view in trace.refocus.get("views", []):
            if view["tag"] == chosen:
                _draw_rect(out, BBox(*view["bbox"]), VIEW_COLOR)
    if gt_bbox is not None:
        _draw_rect(out, gt_bbox, GT_COLOR, thickness=2)
    return out
