"""Deterministic raster and geometry primitives used by every pipeline stage."""

from ._backend import active_backend, set_backend
from ._kernels import warmup as warmup_kernels
from .ops import (
    bbox_of_mask,
    binarize,
    close,
    connected_components,
    dilate,
    disk_offsets,
    distance_to_boundary,
    iou,
    otsu_threshold,
    pad_bbox,
    scale_bbox,
    union_bbox,
)
from .raster import apply_visited, crop

__all__ = [
    "active_backend",
    "set_backend",
    "warmup_kernels",
    "otsu_threshold",
    "binarize",
    "connected_components",
    "distance_to_boundary",
    "close",
    "dilate",
    "disk_offsets",
    "iou",
    "scale_bbox",
    "union_bbox",
    "pad_bbox",
    "bbox_of_mask",
    "crop",
    "apply_visited",
]
