"""Dispatch between the numba and numpy kernel implementations."""

from __future__ import annotations

import numpy as np

from . import _kernels_numpy
from ._backend import active_backend

_numba_mod = None


def _numba():
    global _numba_mod
    if _numba_mod is None:
        from . import _kernels_numba

        _numba_mod = _kernels_numba
    return _numba_mod


def _impl():
    if active_backend() == "numba":
        return _numba()
    return _kernels_numpy


def sqedt(sites: np.ndarray) -> np.ndarray:
    return _impl().sqedt(np.ascontiguousarray(sites, dtype=np.uint8))


def flat_dilate(mask: np.ndarray, half: int) -> np.ndarray:
    return _impl().flat_dilate(np.ascontiguousarray(mask, dtype=np.uint8), half)


def flat_erode(mask: np.ndarray, half: int) -> np.ndarray:
    return _impl().flat_erode(np.ascontiguousarray(mask, dtype=np.uint8), half)


def label4(mask: np.ndarray) -> tuple[np.ndarray, int]:
    return _impl().label4(np.ascontiguousarray(mask, dtype=np.uint8))


def warmup() -> None:
    """Pre-compile the numba kernels (no-op on the numpy backend)."""
    if active_backend() == "numba":
        _numba().warmup()
