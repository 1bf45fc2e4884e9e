"""Pure-numpy fallback kernels.

Exact twins of the numba kernels.  The squared distance transform uses a
vectorized column sweep followed by a shift-and-minimize row pass, which is
O(H*W*W); callers only hand it bounding-box windows, so this stays cheap.
"""

from __future__ import annotations

import numpy as np

_BIG = np.float64(1e12)


def sqedt(sites: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance to the nearest nonzero pixel of `sites`.

    Pixels where sites != 0 get 0.  Columns without any site contribute a
    large sentinel so row minimization still works; if `sites` is entirely
    empty the result is the sentinel everywhere.
    """
    s = sites != 0
    h, w = s.shape
    # Column pass: L1 distance along y to the nearest site in the same column.
    col = np.full((h, w), _BIG)
    run = np.full(w, _BIG)
    for y in range(h):
        run = np.where(s[y], 0.0, run + 1.0)
        col[y] = run
    run = np.full(w, _BIG)
    for y in range(h - 1, -1, -1):
        run = np.where(s[y], 0.0, run + 1.0)
        col[y] = np.minimum(col[y], run)
    g = np.minimum(col, _BIG) ** 2
    g = np.minimum(g, _BIG)
    # Row pass: out[y, x] = min_x' (g[y, x'] + (x - x')^2).
    out = g.copy()
    for dx in range(1, w):
        dsq = float(dx * dx)
        if dsq >= _BIG:
            break
        np.minimum(out[:, dx:], g[:, :-dx] + dsq, out=out[:, dx:])
        np.minimum(out[:, :-dx], g[:, dx:] + dsq, out=out[:, :-dx])
    return out


def _shift2d(mask: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Mask translated by (dy, dx) with zero fill (out-of-image = background)."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    ys0, ys1 = max(dy, 0), min(h + dy, h)
    xs0, xs1 = max(dx, 0), min(w + dx, w)
    if ys0 >= ys1 or xs0 >= xs1:
        return out
    out[ys0:ys1, xs0:xs1] = mask[ys0 - dy : ys1 - dy, xs0 - dx : xs1 - dx]
    return out


def flat_dilate(mask: np.ndarray, half: int) -> np.ndarray:
    """Dilation with a (2*half+1)^2 flat square, out-of-image = background."""
    out = mask.copy()
    for d in range(1, half + 1):
        np.maximum(out, _shift2d(mask, 0, d), out=out)
        np.maximum(out, _shift2d(mask, 0, -d), out=out)
    vert = out.copy()
    for d in range(1, half + 1):
        np.maximum(out, _shift2d(vert, d, 0), out=out)
        np.maximum(out, _shift2d(vert, -d, 0), out=out)
    return out


def flat_erode(mask: np.ndarray, half: int) -> np.ndarray:
    """Erosion with a (2*half+1)^2 flat square; kernel offsets that leave the
    image hit background, so border pixels erode."""
    h, w = mask.shape
    out = mask.copy()
    for d in range(1, half + 1):
        np.minimum(out, _shift2d(mask, 0, d), out=out)
        np.minimum(out, _shift2d(mask, 0, -d), out=out)
    horiz = out.copy()
    for d in range(1, half + 1):
        np.minimum(out, _shift2d(horiz, d, 0), out=out)
        np.minimum(out, _shift2d(horiz, -d, 0), out=out)
    return out


def label4(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected labeling; labels assigned in raster order of each
    component's first pixel, starting at 1."""
    m = mask != 0
    h, w = m.shape
    labels = np.zeros((h, w), dtype=np.int32)
    n = 0
    stack: list[tuple[int, int]] = []
    for y in range(h):
        row = m[y]
        for x in range(w):
            if not row[x] or labels[y, x]:
                continue
            n += 1
            labels[y, x] = n
            stack.append((y, x))
            while stack:
                cy, cx = stack.pop()
                if cy > 0 and m[cy - 1, cx] and not labels[cy - 1, cx]:
                    labels[cy - 1, cx] = n
                    stack.append((cy - 1, cx))
                if cy + 1 < h and m[cy + 1, cx] and not labels[cy + 1, cx]:
                    labels[cy + 1, cx] = n
                    stack.append((cy + 1, cx))
                if cx > 0 and m[cy, cx - 1] and not labels[cy, cx - 1]:
                    labels[cy, cx - 1] = n
                    stack.append((cy, cx - 1))
                if cx + 1 < w and m[cy, cx + 1] and not labels[cy, cx + 1]:
                    labels[cy, cx + 1] = n
                    stack.append((cy, cx + 1))
    return labels, n
