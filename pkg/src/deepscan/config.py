"""Pipeline configuration with the published defaults baked in."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any


@dataclass(frozen=True)
class ScanConfig:
    """Knobs for cue exploration and evidence extraction."""

    tau_area: int = 50  # minimum cue area in pixels
    theta_iou: float = 0.30  # dedup threshold between evidence boxes
    k: int | None = 10  # judge at most k smallest candidates; None = all
    patch_single: int = 576  # tile side for single-object questions
    patch_multi: int = 768  # tile side for multi-object questions
    close_kernel: int = 5  # flat square side for hole sealing
    dilate_radius: int = 20  # disk radius for outward mask extension
    min_tile: int = 32  # remainder tiles thinner than this merge into a neighbor
    one_shot: bool = False  # skip partitioning: single image-level exploration


@dataclass(frozen=True)
class RefocusConfig:
    scale_s: float = 1.5  # zoom-out expansion factor
    detect_pad: int = 28  # padding around detections when zooming in


@dataclass(frozen=True)
class LvlmConfig:
    temperature: float = 0.0
    seed: int = 13
    max_tokens_judgment: int = 50  # decomposition, evidence judgment, completeness
    max_tokens_reason: int = 1024


@dataclass(frozen=True)
class PipelineConfig:
    scan: ScanConfig = field(default_factory=ScanConfig)
    refocus: RefocusConfig = field(default_factory=RefocusConfig)
    lvlm: LvlmConfig = field(default_factory=LvlmConfig)


def _apply(dc, overrides: dict[str, Any]):
    names = {f.name for f in fields(dc)}
    unknown = set(overrides) - names
    if unknown:
        raise KeyError(f"unknown config keys: {sorted(unknown)}")
    clean = dict(overrides)
    if "k" in clean and clean["k"] in ("inf", "none", None):
        clean["k"] = None
    return replace(dc, **clean)


def pipeline_config_from_dict(data: dict[str, Any]) -> PipelineConfig:
    """Build a PipelineConfig from nested mapping {scan: {...}, refocus: {...}, lvlm: {...}}."""
    cfg = PipelineConfig()
    return PipelineConfig(
        scan=_apply(cfg.scan, data.get("scan", {})),
        refocus=_apply(cfg.refocus, data.get("refocus", {})),
        lvlm=_apply(cfg.lvlm, data.get("lvlm", {})),
    )
