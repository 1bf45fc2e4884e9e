"""Core raster and geometry value types.

Conventions used throughout the package:

* images are ``Raster`` arrays of shape (H, W, 3), dtype uint8, row-major;
* gray maps are float64 arrays of shape (H, W), finite values only;
* bit masks are uint8 arrays of shape (H, W) with entries in {0, 1};
* boxes are half-open integer pixel rectangles [x0, x1) x [y0, y1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError


class BBox(NamedTuple):
    """Half-open integer pixel rectangle: x0 <= x < x1, y0 <= y < y1."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height

    def contains_box(self, other: "BBox") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and self.x1 >= other.x1
            and self.y1 >= other.y1
        )

    def contains_point(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def validate(self) -> "BBox":
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidInputError(f"degenerate box {self}")
        if self.x0 < 0 or self.y0 < 0:
            raise InvalidInputError(f"negative box origin {self}")
        return self

    def to_list(self) -> list[int]:
        return [int(self.x0), int(self.y0), int(self.x1), int(self.y1)]


class Raster(np.ndarray):
    """An (H, W, 3) uint8 image carrying the source-image region it covers.

    ``region`` is provenance metadata in original-image coordinates.  It is
    set by ``imaging.crop`` and by image loaders/generators; deterministic
    oracle backends use it to relate a crop back to scene ground truth.
    Remote backends ignore it (only pixels travel over the wire).
    """

    region: BBox | None

    def __new__(cls, data: np.ndarray, region: BBox | None = None) -> "Raster":
        obj = np.asarray(data).view(cls)
        obj.region = region
        return obj

    def __array_finalize__(self, obj):
        if obj is None:
            return
        self.region = getattr(obj, "region", None)


def full_region(image: np.ndarray) -> BBox:
    """The region covering an entire (H, W, ...) array."""
    h, w = image.shape[:2]
    return BBox(0, 0, w, h)


def as_image(data: np.ndarray, region: BBox | None = None) -> Raster:
    """Wrap pixel data as a Raster, validating shape and dtype."""
    arr = np.asarray(data)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"image must be (H, W, 3), got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        arr = arr.astype(np.uint8)
    if region is None:
        region = full_region(arr)
    return Raster(arr, region)


def validate_graymap(data: np.ndarray) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"gray map must be non-empty 2-D, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInputError("gray map contains non-finite values")
    return arr


def validate_mask(data: np.ndarray) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise InvalidInputError(f"mask must be 2-D, got {arr.shape}")
    if arr.dtype != np.uint8:
        arr = arr.astype(np.uint8)
    return arr


@dataclass(frozen=True)
class Component:
    """A maximal 4-connected group of mask pixels.

    ``ys``/``xs`` hold pixel coordinates in raster-scan order, so index 0 is
    the first-encountered pixel and labels are deterministic.
    """

    label: int
    ys: np.ndarray
    xs: np.ndarray

    @property
    def area(self) -> int:
        return int(self.ys.size)

    @property
    def bbox(self) -> BBox:
        return BBox(
            int(self.xs.min()),
            int(self.ys.min()),
            int(self.xs.max()) + 1,
            int(self.ys.max()) + 1,
        )


@dataclass(frozen=True)
class StructuringElement:
    """Flat-square or disk structuring element for morphology.

    Flat squares have an odd side length; disks contain the integer offsets
    (dx, dy) with dx*dx + dy*dy <= radius*radius.
    """

    kind: str  # "flat" | "disk"
    size: int  # side length for flat, radius for disk

    @staticmethod
    def flat(size: int) -> "StructuringElement":
        if size < 1 or size % 2 == 0:
            raise InvalidInputError(f"flat kernel side must be odd and >= 1, got {size}")
        return StructuringElement("flat", size)

    @staticmethod
    def disk(radius: int) -> "StructuringElement":
        if radius < 0:
            raise InvalidInputError(f"disk radius must be >= 0, got {radius}")
        return StructuringElement("disk", radius)
