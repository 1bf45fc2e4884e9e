"""Evidence-enhanced answering and the end-to-end pipeline.

The hybrid memory orders the fine-grained evidence crops by discovery and
appends the best coarse view, forming the multi-image prompt for the final
answer.  With no evidence the memory degrades to the full image, which is
exactly the plain-model baseline behavior.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import PipelineConfig
from .errors import InvalidInputError, PipelineError, TransportError
from .experts.base import ExpertBundle, InstrumentedBundle, Question
from .refocusing import View, refocus
from .scanning import EvidenceItem, hierarchical_scan
from .types import Raster, full_region


@dataclass
class HybridMemory:
    fine_crops: list[Raster]
    coarse_view: Raster
    provenance: list[dict[str, Any]]

    @property
    def images(self) -> list[Raster]:
        return list(self.fine_crops) + [self.coarse_view]


@dataclass
class RunTrace:
    scan: dict[str, Any] = field(default_factory=dict)
    refocus: dict[str, Any] | None = None
    fallback: bool = False
    memory: list[dict[str, Any]] = field(default_factory=list)
    answer: str = ""
    expert_calls: dict[str, int] = field(default_factory=dict)
    error: str | None = None
    timings_s: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "scan": self.scan,
            "refocus": self.refocus,
            "fallback": self.fallback,
            "memory": self.memory,
            "answer": self.answer,
            "expert_calls": self.expert_calls,
            "error": self.error,
        }
        if include_timing:
            out["timings_s"] = self.timings_s
        return out

    def to_json(self, include_timing: bool = False) -> str:
        # Wall-clock timings stay out of the canonical bytes so identical
        # runs serialize identically.
        return json.dumps(
            self.to_dict(include_timing), sort_keys=True, separators=(",", ":")
        )


def build_memory(evidence: list[EvidenceItem], v_star: View | None, image: Raster) -> HybridMemory:
    """Fine crops in discovery order, then the chosen coarse view.

    Empty evidence degrades to a memory holding only the full image.
    """
    if not evidence:
        region = full_region(image)
        return HybridMemory(
            fine_crops=[],
            coarse_view=Raster(np.asarray(image), region),
            provenance=[{"kind": "full_image", "bbox": region.to_list()}],
        )
    if v_star is None:
        raise InvalidInputError("non-empty evidence requires a chosen view")
    ordered = sorted(evidence, key=lambda it: it.discovery_index)
    provenance = [
        {"kind": "evidence", "bbox": it.bbox.to_list(), "tight_bbox": it.tight_bbox.to_list()}
        for it in ordered
    ]
    provenance.append({"kind": v_star.tag, "bbox": v_star.bbox.to_list()})
    return HybridMemory(
        fine_crops=[it.crop for it in ordered],
        coarse_view=v_star.crop,
        provenance=provenance,
    )


def reason(memory: HybridMemory, q: Question, lvlm) -> str:
    """Final free-text answer over the ordered multi-image prompt."""
    images = memory.images
    if not images:
        raise InvalidInputError("reasoning requires a non-empty memory")
    return lvlm.answer(images, q)


def run_pipeline(
    image: Raster,
    q: Question,
    experts: ExpertBundle,
    cfg: PipelineConfig | None = None,
) -> tuple[str, RunTrace]:
    """Scan, refocus (when evidence exists), assemble memory, answer.

    Deterministic for fixed inputs, config, and oracle scene.  Expert
    transport failures abort with a structured error recorded in the trace.
    """
    cfg = cfg or PipelineConfig()
    bundle = InstrumentedBundle.wrap(experts) if not isinstance(experts, InstrumentedBundle) else experts
    trace = RunTrace()
    try:
        t0 = time.perf_counter()
        evidence, scan_trace = hierarchical_scan(image, q, bundle, cfg.scan)
        trace.scan = scan_trace.to_dict()
        trace.timings_s["scan"] = time.perf_counter() - t0
        v_star = None
        if evidence:
            t1 = time.perf_counter()
            v_star, refocus_trace = refocus(image, q, q.targets, evidence, bundle, cfg.refocus)
            trace.refocus = refocus_trace.to_dict()
            trace.timings_s["refocus"] = time.perf_counter() - t1
        else:
            trace.fallback = True
        memory = build_memory(evidence, v_star, image)
        trace.memory = memory.provenance
        t2 = time.perf_counter()
        answer = reason(memory, q, bundle.lvlm)
        trace.timings_s["reason"] = time.perf_counter() - t2
        trace.answer = answer
        trace.expert_calls = bundle.counts.as_dict()
        return answer, trace
    except TransportError as exc:
        trace.error = f"transport: {exc}"
        trace.expert_calls = bundle.counts.as_dict()
        raise PipelineError(str(exc), trace) from exc
