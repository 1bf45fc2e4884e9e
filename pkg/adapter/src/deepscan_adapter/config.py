"""Server configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml


@dataclass(frozen=True)
class BackendConfig:
    backend: str = "stub"  # registry key; must resolve at startup
    device: str = "cpu"
    # Attention extraction knob for real search backends.  Kept as server
    # config because clients are insulated by the wire contract.
    gradcam_layer: str = "itm_cross_attention.final_block"
    max_image_pixels: int = 4096 * 4096
    max_prompt_chars: int = 32_768
    batch_window_ms: float = 8.0
    batch_max: int = 16


def load_config(path: str | Path | None) -> BackendConfig:
    if path is None:
        return BackendConfig()
    with open(path) as fh:
        data: dict[str, Any] = yaml.safe_load(fh) or {}
    known = {f for f in BackendConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return BackendConfig(**data)
