"""Kernel backend selection.

The raster kernels (distance transform, flat morphology, component labeling)
exist twice: a numba @njit implementation and a pure-numpy fallback.  The
active backend is chosen by the DEEPSCAN_BACKEND environment variable
("numba" or "numpy"); numba is the default when importable.  Tests and the
kernel benchmark switch backends at runtime via set_backend().
"""

from __future__ import annotations

import os

_VALID = ("numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _initial_backend() -> str:
    env = os.environ.get("DEEPSCAN_BACKEND", "").strip().lower()
    if env in _VALID:
        if env == "numba" and not _numba_available():
            raise RuntimeError("DEEPSCAN_BACKEND=numba but numba is not importable")
        return env
    return "numba" if _numba_available() else "numpy"


_active = _initial_backend()


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {_VALID}")
    if name == "numba" and not _numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    _active = name
