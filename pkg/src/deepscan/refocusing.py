"""Evidence-view recalibration.

Starting from the box around all collected evidence, two actions vary the
surrounding context: zoom-in crops to the union of detections (padded), and
zoom-out scales the box isotropically.  Only four views are scored, a pruned
subset of the depth-2 action lattice: the initial view, its zoom-in, its
zoom-out, and the zoom-in of the zoom-out.  The reward is an indicator of
evidential sufficiency times the image-to-view area ratio, so the smallest
still-sufficient view wins; ties resolve to the earliest view in traversal
order.  The exhaustive seven-state lattice is kept alongside for search-space
completeness comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .config import RefocusConfig
from .errors import InvalidInputError
from .experts.base import ExpertBundle, Question
from .experts.prompts import completeness_prompt
from .imaging import crop, pad_bbox, scale_bbox, union_bbox
from .types import BBox, Raster, full_region


@dataclass(eq=False)
class View:
    bbox: BBox  # image coordinates
    crop: Raster
    tag: str  # V1 | V2 | V3 | V4 | lattice state name
    reward: float = 0.0


@dataclass
class RefocusTrace:
    views: list[dict[str, Any]] = field(default_factory=list)
    chosen: str = ""
    judge_calls: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"views": self.views, "chosen": self.chosen, "judge_calls": self.judge_calls}


def init_view(evidence, image: Raster) -> View:
    """The crop around all evidence boxes."""
    if not evidence:
        raise InvalidInputError("refocusing requires a non-empty evidence set")
    box = union_bbox([item.bbox for item in evidence])
    return View(bbox=box, crop=crop(image, box), tag="V1")


def zoom_in(view: View, q: Question, detector, cfg: RefocusConfig, image: Raster, tag: str) -> View:
    """Narrow to the padded union of in-view detections; identity when the
    detector finds nothing."""
    boxes = detector.detect(view.crop, q)
    if not boxes:
        return View(bbox=view.bbox, crop=crop(image, view.bbox), tag=tag)
    h, w = view.crop.shape[:2]
    local = pad_bbox(union_bbox(boxes), cfg.detect_pad, BBox(0, 0, w, h))
    box = BBox(
        view.bbox.x0 + local.x0,
        view.bbox.y0 + local.y0,
        view.bbox.x0 + local.x1,
        view.bbox.y0 + local.y1,
    )
    return View(bbox=box, crop=crop(image, box), tag=tag)


def zoom_out(view: View, s: float, image: Raster, tag: str) -> View:
    """Expand isotropically about the view center, clipped at image bounds."""
    if s <= 1:
        raise InvalidInputError(f"zoom-out scale must be > 1, got {s}")
    box = scale_bbox(view.bbox, s, full_region(image))
    return View(bbox=box, crop=crop(image, box), tag=tag)


def reward(view: View, targets: list[str], lvlm, image_hw: tuple[int, int]) -> float:
    """Sufficiency indicator times the image-to-view area ratio."""
    if not targets:
        raise InvalidInputError("reward requires a non-empty target list")
    verdict = lvlm.judge(view.crop, completeness_prompt(targets))
    if not verdict.affirmed:
        return 0.0
    h, w = view.crop.shape[:2]
    return (image_hw[0] * image_hw[1]) / float(h * w)


def _score_views(views, targets, lvlm, image_hw, trace: RefocusTrace | None):
    best_idx = 0
    best = -1.0
    for i, view in enumerate(views):
        view.reward = reward(view, targets, lvlm, image_hw)
        if trace is not None:
            trace.judge_calls += 1
            trace.views.append(
                {
                    "tag": view.tag,
                    "bbox": view.bbox.to_list(),
                    "affirmed": view.reward > 0.0,
                    "reward": view.reward,
                }
            )
        if view.reward > best:
            best = view.reward
            best_idx = i
    return best_idx


def refocus(
    image: Raster,
    q: Question,
    targets: list[str],
    evidence,
    experts: ExpertBundle,
    cfg: RefocusConfig | None = None,
) -> tuple[View, RefocusTrace]:
    """Score the pruned four-view set and return the greedy best.

    Exactly four judge calls; all-zero rewards fall back to the initial view.
    """
    cfg = cfg or RefocusConfig()
    trace = RefocusTrace()
    v1 = init_view(evidence, image)
    v2 = zoom_in(v1, q, experts.visual, cfg, image, "V2")
    v3 = zoom_out(v1, cfg.scale_s, image, "V3")
    v4 = zoom_in(v3, q, experts.visual, cfg, image, "V4")
    views = [v1, v2, v3, v4]
    h, w = image.shape[:2]
    best = _score_views(views, targets, experts.lvlm, (h, w), trace)
    trace.chosen = views[best].tag
    return views[best], trace


def exhaustive_depth2(
    image: Raster,
    q: Question,
    targets: list[str],
    evidence,
    experts: ExpertBundle,
    cfg: RefocusConfig | None = None,
) -> tuple[View, int]:
    """Score every depth-2 reachable state in breadth-first order.

    Returns the best view and the search length: the 1-based index at which
    the maximum-reward state was first expanded.
    """
    cfg = cfg or RefocusConfig()
    v1 = init_view(evidence, image)
    in1 = zoom_in(v1, q, experts.visual, cfg, image, "In(V1)")
    out1 = zoom_out(v1, cfg.scale_s, image, "Out(V1)")
    states = [
        v1,
        in1,
        out1,
        zoom_in(in1, q, experts.visual, cfg, image, "In(In(V1))"),
        zoom_out(in1, cfg.scale_s, image, "Out(In(V1))"),
        zoom_in(out1, q, experts.visual, cfg, image, "In(Out(V1))"),
        zoom_out(out1, cfg.scale_s, image, "Out(Out(V1))"),
    ]
    h, w = image.shape[:2]
    for state in states:
        state.reward = reward(state, targets, experts.lvlm, (h, w))
    best = max(s.reward for s in states)
    first = next(i for i, s in enumerate(states) if s.reward == best)
    return states[first], first + 1


def pruned_search_length(trace: RefocusTrace) -> int:
    """1-based index of the first traversed view achieving the final reward."""
    best = max(v["reward"] for v in trace.views)
    for i, v in enumerate(trace.views):
        if v["reward"] == best:
            return i + 1
    return len(trace.views)
