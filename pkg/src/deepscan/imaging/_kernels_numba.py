"""Numba-accelerated raster kernels.

The squared distance transform is the two-pass lower-envelope algorithm
(exact for squared Euclidean distance on integer grids): a column sweep for
per-column distances, then per-row minimization over parabolas.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_BIG = 1e12


@njit(cache=True)
def sqedt(sites: np.ndarray) -> np.ndarray:
    h, w = sites.shape
    g = np.empty((h, w), dtype=np.float64)
    # Column pass: squared L1 distance along y to the nearest site.
    for x in range(w):
        run = _BIG
        for y in range(h):
            if sites[y, x] != 0:
                run = 0.0
            elif run < _BIG:
                run += 1.0
            g[y, x] = run
        run = _BIG
        for y in range(h - 1, -1, -1):
            if sites[y, x] != 0:
                run = 0.0
            elif run < _BIG:
                run += 1.0
            if run < g[y, x]:
                g[y, x] = run
        for y in range(h):
            v = g[y, x]
            g[y, x] = v * v if v < _BIG else _BIG
    # Row pass: lower envelope of parabolas x -> g[y, x'] + (x - x')^2.
    out = np.empty((h, w), dtype=np.float64)
    v = np.empty(w, dtype=np.int64)
    z = np.empty(w + 1, dtype=np.float64)
    for y in range(h):
        k = 0
        v[0] = 0
        z[0] = -_BIG
        z[1] = _BIG
        for q in range(1, w):
            fq = g[y, q] + q * q
            s = (fq - (g[y, v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
            while s <= z[k]:
                k -= 1
                s = (fq - (g[y, v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = _BIG
        k = 0
        for q in range(w):
            while z[k + 1] < q:
                k += 1
            d = q - v[k]
            val = d * d + g[y, v[k]]
            out[y, q] = val if val < _BIG else _BIG
    return out


@njit(cache=True)
def flat_dilate(mask: np.ndarray, half: int) -> np.ndarray:
    # Separable square max: horizontal window pass, then a vertical pass
    # reading nearby rows (row-major friendly for small windows).
    h, w = mask.shape
    tmp = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            if mask[y, x] != 0:
                lo = x - half
                if lo < 0:
                    lo = 0
                hi = x + half + 1
                if hi > w:
                    hi = w
                for j in range(lo, hi):
                    tmp[y, j] = 1
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        lo = y - half
        if lo < 0:
            lo = 0
        hi = y + half + 1
        if hi > h:
            hi = h
        for yy in range(lo, hi):
            for x in range(w):
                if tmp[yy, x] != 0:
                    out[y, x] = 1
    return out


@njit(cache=True)
def flat_erode(mask: np.ndarray, half: int) -> np.ndarray:
    # Kernel offsets leaving the image hit background, so border pixels erode.
    h, w = mask.shape
    tmp = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            if x - half < 0 or x + half + 1 > w:
                continue
            ok = True
            for j in range(x - half, x + half + 1):
                if mask[y, j] == 0:
                    ok = False
                    break
            if ok:
                tmp[y, x] = 1
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        if y - half < 0 or y + half + 1 > h:
            continue
        for x in range(w):
            out[y, x] = 1
        for yy in range(y - half, y + half + 1):
            for x in range(w):
                if tmp[yy, x] == 0:
                    out[y, x] = 0
    return out


@njit(cache=True)
def label4(mask: np.ndarray) -> tuple[np.ndarray, int]:
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    stack = np.empty((h * w, 2), dtype=np.int64)
    n = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] == 0 or labels[y, x] != 0:
                continue
            n += 1
            labels[y, x] = n
            top = 0
            stack[top, 0] = y
            stack[top, 1] = x
            top = 1
            while top > 0:
                top -= 1
                cy = stack[top, 0]
                cx = stack[top, 1]
                if cy > 0 and mask[cy - 1, cx] != 0 and labels[cy - 1, cx] == 0:
                    labels[cy - 1, cx] = n
                    stack[top, 0] = cy - 1
                    stack[top, 1] = cx
                    top += 1
                if cy + 1 < h and mask[cy + 1, cx] != 0 and labels[cy + 1, cx] == 0:
                    labels[cy + 1, cx] = n
                    stack[top, 0] = cy + 1
                    stack[top, 1] = cx
                    top += 1
                if cx > 0 and mask[cy, cx - 1] != 0 and labels[cy, cx - 1] == 0:
                    labels[cy, cx - 1] = n
                    stack[top, 0] = cy
                    stack[top, 1] = cx - 1
                    top += 1
                if cx + 1 < w and mask[cy, cx + 1] != 0 and labels[cy, cx + 1] == 0:
                    labels[cy, cx + 1] = n
                    stack[top, 0] = cy
                    stack[top, 1] = cx + 1
                    top += 1
    return labels, n


def warmup() -> None:
    """Trigger JIT compilation of every kernel on tiny inputs."""
    m = np.zeros((4, 4), dtype=np.uint8)
    m[1, 1] = 1
    sqedt(m)
    flat_dilate(m, 1)
    flat_erode(m, 1)
    label4(m)
