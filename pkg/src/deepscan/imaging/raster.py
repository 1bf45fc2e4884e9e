"""Image cropping and visited-region masking."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..types import BBox, Raster, full_region


def crop(img: Raster, b: BBox) -> Raster:
    """Extract the half-open rectangle b as a new image.

    The crop's region provenance composes with the source's, so a crop of a
    crop still points into the original image.
    """
    b.validate()
    h, w = img.shape[:2]
    if b.x1 > w or b.y1 > h:
        raise InvalidInputError(f"crop box {b} exceeds image {w}x{h}")
    base = getattr(img, "region", None) or full_region(img)
    region = BBox(base.x0 + b.x0, base.y0 + b.y0, base.x0 + b.x1, base.y0 + b.y1)
    data = np.ascontiguousarray(np.asarray(img)[b.y0 : b.y1, b.x0 : b.x1])
    return Raster(data, region)


def apply_visited(img: Raster, mask: np.ndarray) -> Raster:
    """Zero all three channels wherever mask == 1; pure (returns a copy)."""
    if mask.shape != img.shape[:2]:
        raise InvalidInputError(
            f"visited mask {mask.shape} does not match image {img.shape[:2]}"
        )
    out = np.array(img, copy=True)
    out[mask != 0] = 0
    return Raster(out, getattr(img, "region", None))
