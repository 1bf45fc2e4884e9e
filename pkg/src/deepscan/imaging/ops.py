"""Raster primitives: thresholding, components, distances, morphology.

All operations are pure functions over immutable inputs.  Morphology follows
the standard set definitions with out-of-image treated as background; the
wrappers restrict computation to a padded bounding-box window, which is exact
because the influence of a structuring element is bounded by its reach.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EmptyMaskError, InvalidInputError
from ..types import BBox, Component, StructuringElement, validate_graymap, validate_mask
from . import _kernels


def otsu_threshold(gray: np.ndarray) -> float:
    """Threshold maximizing between-class variance over a 256-bin histogram.

    Values are min-max scaled before binning and the winning bin edge is
    mapped back to the original range; ties pick the lowest bin.  A constant
    map returns the constant itself.
    """
    arr = validate_graymap(gray)
    mn = float(arr.min())
    mx = float(arr.max())
    if mx == mn:
        return mn
    scaled = (arr - mn) / (mx - mn)
    bins = np.minimum((scaled * 256.0).astype(np.int64), 255)
    hist = np.bincount(bins.ravel(), minlength=256).astype(np.float64)
    b = _otsu_best_bin(hist)
    return mn + (b / 256.0) * (mx - mn)


def _otsu_best_bin(hist: np.ndarray) -> int:
    """Best split index b (class 0 = bins [0, b), class 1 = bins [b, 256))."""
    idx = np.arange(hist.size, dtype=np.float64)
    c0 = np.cumsum(hist)[:-1]
    s0 = np.cumsum(hist * idx)[:-1]
    total = hist.sum()
    total_s = float((hist * idx).sum())
    c1 = total - c0
    valid = (c0 > 0) & (c1 > 0)
    mu0 = np.divide(s0, c0, out=np.zeros_like(s0), where=valid)
    mu1 = np.divide(total_s - s0, c1, out=np.zeros_like(s0), where=valid)
    score = np.where(valid, c0 * c1 * (mu0 - mu1) ** 2, -1.0)
    return int(np.argmax(score)) + 1


def binarize(gray: np.ndarray, threshold: float) -> np.ndarray:
    arr = np.asarray(gray)
    return (arr >= threshold).astype(np.uint8)


def connected_components(mask: np.ndarray) -> list[Component]:
    """Partition the 1-pixels into maximal 4-connected components.

    Labels follow raster-scan order of each component's first pixel and the
    per-component pixel lists are raster-ordered.
    """
    m = validate_mask(mask)
    labels, n = _kernels.label4(m)
    if n == 0:
        return []
    ys, xs = np.nonzero(m)  # raster order
    labs = labels[ys, xs]
    order = np.argsort(labs, kind="stable")
    ys, xs, labs = ys[order], xs[order], labs[order]
    counts = np.bincount(labs, minlength=n + 1)
    comps = []
    start = 0
    for lab in range(1, n + 1):
        stop = start + int(counts[lab])
        comps.append(
            Component(label=lab, ys=ys[start:stop].copy(), xs=xs[start:stop].copy())
        )
        start = stop
    return comps


def distance_to_boundary(component: Component, patch_bounds: BBox) -> np.ndarray:
    """Euclidean distance from each component pixel to the nearest background
    pixel, with everything outside `patch_bounds` counting as background.

    Returns a float64 map with the bounds' dimensions (coordinates local to
    the bounds origin); off-component pixels are 0 and on-component distances
    are always >= 1.
    """
    if component.area == 0:
        raise InvalidInputError("empty component")
    ys = component.ys - patch_bounds.y0
    xs = component.xs - patch_bounds.x0
    h = patch_bounds.height
    w = patch_bounds.width
    if ys.min() < 0 or xs.min() < 0 or ys.max() >= h or xs.max() >= w:
        raise InvalidInputError("component pixels fall outside patch bounds")
    # Window = component bbox padded by one ring; the ring is always
    # background (either non-component or beyond the bounds), and no farther
    # background pixel can beat the nearest ring pixel.
    by0, by1 = int(ys.min()), int(ys.max()) + 1
    bx0, bx1 = int(xs.min()), int(xs.max()) + 1
    sites = np.ones((by1 - by0 + 2, bx1 - bx0 + 2), dtype=np.uint8)
    sites[ys - by0 + 1, xs - bx0 + 1] = 0
    sq = _kernels.sqedt(sites)
    out = np.zeros((h, w), dtype=np.float64)
    out[ys, xs] = np.sqrt(sq[ys - by0 + 1, xs - bx0 + 1])
    return out


def close(mask: np.ndarray, k: StructuringElement) -> np.ndarray:
    """Morphological closing (dilation then erosion) with a flat square."""
    if k.kind != "flat":
        raise InvalidInputError(f"closing requires a flat kernel, got {k.kind}")
    m = validate_mask(mask)
    half = k.size // 2
    if half == 0 or not m.any():
        return m.copy()
    win, (y0, x0) = _mask_window(m, 2 * half)
    closed = _kernels.flat_erode(_kernels.flat_dilate(win, half), half)
    out = np.zeros_like(m)
    out[y0 : y0 + closed.shape[0], x0 : x0 + closed.shape[1]] = closed
    return out


def dilate(mask: np.ndarray, s: StructuringElement) -> np.ndarray:
    """Set dilation with a disk of integer offsets dx*dx + dy*dy <= r*r,
    clipped at image bounds."""
    if s.kind != "disk":
        raise InvalidInputError(f"dilation requires a disk kernel, got {s.kind}")
    m = validate_mask(mask)
    r = s.size
    if r == 0 or not m.any():
        return m.copy()
    win, (y0, x0) = _mask_window(m, r)
    sq = _kernels.sqedt(win)
    out = np.zeros_like(m)
    out[y0 : y0 + win.shape[0], x0 : x0 + win.shape[1]] = (sq <= float(r * r)).astype(
        np.uint8
    )
    return out


def _mask_extent(mask: np.ndarray) -> tuple[int, int, int, int] | None:
    """(x0, y0, x1, y1) of the set pixels via axis reductions; None if empty.

    Axis any() plus argmax from both ends beats nonzero() on large rasters
    because no index arrays are materialized.
    """
    rows = mask.any(axis=1)
    if not rows.any():
        return None
    cols = mask.any(axis=0)
    y0 = int(np.argmax(rows))
    y1 = int(len(rows) - np.argmax(rows[::-1]))
    x0 = int(np.argmax(cols))
    x1 = int(len(cols) - np.argmax(cols[::-1]))
    return x0, y0, x1, y1


def _mask_window(mask: np.ndarray, reach: int) -> tuple[np.ndarray, tuple[int, int]]:
    """The mask's bounding box padded by `reach`, clipped to the image."""
    x0, y0, x1, y1 = _mask_extent(mask)
    y0 = max(y0 - reach, 0)
    y1 = min(y1 + reach, mask.shape[0])
    x0 = max(x0 - reach, 0)
    x1 = min(x1 + reach, mask.shape[1])
    return np.ascontiguousarray(mask[y0:y1, x0:x1]), (y0, x0)


def bbox_of_mask(mask: np.ndarray) -> BBox:
    m = validate_mask(mask)
    extent = _mask_extent(m)
    if extent is None:
        raise EmptyMaskError("cannot take the bounding box of an empty mask")
    return BBox(*extent)


def disk_offsets(radius: int) -> np.ndarray:
    """Integer (dy, dx) offsets of the disk structuring element."""
    r = int(radius)
    span = np.arange(-r, r + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    keep = dy * dy + dx * dx <= r * r
    return np.stack([dy[keep], dx[keep]], axis=1)


def iou(a: BBox, b: BBox) -> float:
    ix0 = max(a.x0, b.x0)
    iy0 = max(a.y0, b.y0)
    ix1 = min(a.x1, b.x1)
    iy1 = min(a.y1, b.y1)
    inter = max(ix1 - ix0, 0) * max(iy1 - iy0, 0)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def union_bbox(boxes: list[BBox]) -> BBox:
    if not boxes:
        raise InvalidInputError("union_bbox requires at least one box")
    return BBox(
        min(b.x0 for b in boxes),
        min(b.y0 for b in boxes),
        max(b.x1 for b in boxes),
        max(b.y1 for b in boxes),
    )


def pad_bbox(b: BBox, pad: int, bounds: BBox) -> BBox:
    return BBox(
        max(b.x0 - pad, bounds.x0),
        max(b.y0 - pad, bounds.y0),
        min(b.x1 + pad, bounds.x1),
        min(b.y1 + pad, bounds.y1),
    )


def scale_bbox(b: BBox, s: float, bounds: BBox) -> BBox:
    """Scale width and height by s about the box center, rounding outward,
    then clip to bounds.  The result always contains the input box."""
    if s < 1:
        raise InvalidInputError(f"scale factor must be >= 1, got {s}")
    if s == 1:
        return b
    cx = (b.x0 + b.x1) / 2.0
    cy = (b.y0 + b.y1) / 2.0
    hw = s * b.width / 2.0
    hh = s * b.height / 2.0
    return BBox(
        max(math.floor(cx - hw), bounds.x0),
        max(math.floor(cy - hh), bounds.y0),
        min(math.ceil(cx + hw), bounds.x1),
        min(math.ceil(cy + hh), bounds.y1),
    )
