"""Bottom-up evidence localization.

The image is tiled, each tile is searched for attention cues, every cue is
reduced to one interior proxy point (best normalized-attention times
normalized-boundary-distance), and proxies are lifted to image coordinates.
Extraction then walks proxies by descending score: segment at the point,
seal and extend the mask, record the evidence crop, black out the visited
region, and drop any remaining proxies the region swallowed.  Finally the k
smallest candidates are screened by the language model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import ScanConfig
from .errors import ProtocolError
from .experts.base import ExpertBundle, Question
from .experts.prompts import judge_prompt
from .imaging import (
    bbox_of_mask,
    binarize,
    close,
    connected_components,
    crop,
    dilate,
    distance_to_boundary,
    iou,
    otsu_threshold,
)
from .types import BBox, Raster, StructuringElement, full_region


@dataclass
class Patch:
    pixels: Raster
    offset: tuple[int, int]
    index: int

    @property
    def bbox(self) -> BBox:
        h, w = self.pixels.shape[:2]
        return BBox(self.offset[0], self.offset[1], self.offset[0] + w, self.offset[1] + h)


@dataclass(frozen=True)
class Proxy:
    point: tuple[int, int]  # image coordinates
    score: float
    source_patch: int


@dataclass(eq=False)
class EvidenceItem:
    bbox: BBox  # box of the post-processed (sealed + extended) mask
    crop: Raster  # cut from the original, unmasked image
    mask_area: int  # pixels in the post-processed mask
    tight_bbox: BBox  # box of the raw segmenter mask, used for grounding metrics
    discovery_index: int
    affirmed: bool = False


@dataclass
class ScanTrace:
    mode: str
    patch_size: int
    patches: list[dict[str, Any]] = field(default_factory=list)
    proxies: list[dict[str, Any]] = field(default_factory=list)
    events: list[dict[str, Any]] = field(default_factory=list)
    candidates: list[dict[str, Any]] = field(default_factory=list)
    judge_calls: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "patch_size": self.patch_size,
            "patches": self.patches,
            "proxies": self.proxies,
            "events": self.events,
            "candidates": self.candidates,
            "judge_calls": self.judge_calls,
        }


def select_patch_size(q: Question, lvlm, cfg: ScanConfig) -> int:
    """Tile side conditioned on how many objects the question mentions."""
    targets = q.decomposed_targets
    if targets is None:
        targets = lvlm.decompose(q)
    return cfg.patch_single if len(targets) == 1 else cfg.patch_multi


def _axis_segments(total: int, l: int, min_tile: int) -> list[tuple[int, int]]:
    if total <= l:
        return [(0, total)]
    bounds = list(range(0, total, l)) + [total]
    segs = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
    if segs[-1][1] - segs[-1][0] < min_tile and len(segs) >= 2:
        segs[-2:] = [(segs[-2][0], total)]
    return segs


def partition(image: Raster, l: int, min_tile: int = 32) -> list[Patch]:
    """Non-overlapping tiles in raster order, covering the image exactly.

    Remainder tiles keep their smaller native size; remainders thinner than
    `min_tile` along either axis merge into the neighboring tile.
    """
    h, w = image.shape[:2]
    xsegs = _axis_segments(w, l, min_tile)
    ysegs = _axis_segments(h, l, min_tile)
    patches = []
    index = 0
    for y0, y1 in ysegs:
        for x0, x1 in xsegs:
            patches.append(
                Patch(pixels=crop(image, BBox(x0, y0, x1, y1)), offset=(x0, y0), index=index)
            )
            index += 1
    return patches


def explore_cues(patch: Patch, q: Question, search_expert, cfg: ScanConfig) -> list[Proxy]:
    """One proxy per sufficiently large cue in the patch's attention map.

    The proxy maximizes normalized attention times normalized distance to the
    cue boundary; ties resolve to the smallest (y, x).  An all-zero attention
    map yields no proxies.
    """
    s_map = np.asarray(search_expert.search(patch.pixels, q), dtype=np.float64)
    h, w = patch.pixels.shape[:2]
    if s_map.shape != (h, w):
        raise ProtocolError(f"search map {s_map.shape} does not match patch {(h, w)}")
    if not np.isfinite(s_map).all() or s_map.min() < 0:
        raise ProtocolError("search map must be finite and non-negative")
    if s_map.max() <= 0.0:
        return []
    threshold = otsu_threshold(s_map)
    cue_mask = binarize(s_map, threshold)
    smin, smax = float(s_map.min()), float(s_map.max())
    if smax > smin:
        s_norm = (s_map - smin) / (smax - smin)
    else:
        s_norm = np.ones_like(s_map)
    bounds = BBox(0, 0, w, h)
    off_x, off_y = patch.offset
    proxies = []
    for comp in connected_components(cue_mask):
        if comp.area < cfg.tau_area:
            continue
        dist = distance_to_boundary(comp, bounds)
        dvals = dist[comp.ys, comp.xs]
        dmin, dmax = float(dvals.min()), float(dvals.max())
        if dmax > dmin:
            dnorm = (dvals - dmin) / (dmax - dmin)
        else:
            dnorm = np.ones_like(dvals)
        product = s_norm[comp.ys, comp.xs] * dnorm
        best = int(np.argmax(product))  # first max: comp pixels are raster-ordered
        proxies.append(
            Proxy(
                point=(int(comp.xs[best]) + off_x, int(comp.ys[best]) + off_y),
                score=float(product[best]),
                source_patch=patch.index,
            )
        )
    return proxies


def _proxy_order(proxies: list[Proxy]) -> list[Proxy]:
    return sorted(proxies, key=lambda p: (-p.score, p.point[1], p.point[0]))


def extract_evidence(
    image: Raster,
    proxies: list[Proxy],
    visual,
    cfg: ScanConfig,
    trace: ScanTrace | None = None,
) -> tuple[list[EvidenceItem], np.ndarray]:
    """Greedy multi-scale extraction over score-ranked proxies.

    Segmentation runs on the visited-masked working image, but crops come
    from the original so evidence pixels are never blacked out.  Returns the
    deduplicated candidate list and the accumulated visited mask.
    """
    h, w = image.shape[:2]
    close_kernel = StructuringElement.flat(cfg.close_kernel)
    extend_kernel = StructuringElement.disk(cfg.dilate_radius)
    queue = _proxy_order(proxies)
    # One working copy, blacked out in place per visited region; equivalent
    # to repeated pure masking but without a full-image copy per step.
    work = Raster(np.array(image, copy=True), getattr(image, "region", None))
    visited = np.zeros((h, w), dtype=np.uint8)
    items: list[EvidenceItem] = []
    events = trace.events if trace is not None else []
    discovery = 0
    while queue:
        proxy = queue.pop(0)
        px, py = proxy.point
        event: dict[str, Any] = {"point": [px, py], "score": proxy.score}
        mask = np.asarray(visual.segment(work, proxy.point), dtype=np.uint8)
        if mask.shape != (h, w):
            raise ProtocolError(f"segment mask {mask.shape} does not match image {(h, w)}")
        if not mask.any():
            event["action"] = "empty_mask"
            events.append(event)
            continue
        mask_plus = dilate(close(mask, close_kernel), extend_kernel)
        box = bbox_of_mask(mask_plus)
        event["bbox"] = box.to_list()
        duplicate = any(iou(box, it.bbox) > cfg.theta_iou for it in items)
        if duplicate:
            event["action"] = "dedup_dropped"
        else:
            items.append(
                EvidenceItem(
                    bbox=box,
                    crop=crop(image, box),
                    mask_area=int(mask_plus.sum()),
                    tight_bbox=bbox_of_mask(mask),
                    discovery_index=discovery,
                )
            )
            discovery += 1
            event["action"] = "extracted"
        events.append(event)
        win = mask_plus[box.y0 : box.y1, box.x0 : box.x1]
        np.asarray(work)[box.y0 : box.y1, box.x0 : box.x1][win != 0] = 0
        np.maximum(visited[box.y0 : box.y1, box.x0 : box.x1], win,
                   out=visited[box.y0 : box.y1, box.x0 : box.x1])
        survivors = []
        for other in queue:
            if mask_plus[other.point[1], other.point[0]]:
                events.append(
                    {
                        "point": [other.point[0], other.point[1]],
                        "score": other.score,
                        "action": "inside_visited",
                    }
                )
            else:
                survivors.append(other)
        queue = survivors
    return items, visited


def take_k_smallest(items: list[EvidenceItem], k: int | None) -> list[EvidenceItem]:
    """The min(k, n) smallest candidates by box area; ties keep discovery order."""
    ordered = sorted(items, key=lambda it: it.bbox.area)  # stable
    if k is None:
        return ordered
    return ordered[: max(int(k), 0)]


def hierarchical_scan(
    image: Raster,
    q: Question,
    experts: ExpertBundle,
    cfg: ScanConfig | None = None,
) -> tuple[list[EvidenceItem], ScanTrace]:
    """Full scan: tile, explore, extract, screen.

    Returns the affirmed evidence in judged (area-ascending) order plus the
    scan trace.  An empty result is valid and signals the fallback path.
    """
    cfg = cfg or ScanConfig()
    if getattr(image, "region", None) is None:
        image = Raster(np.asarray(image), full_region(image))
    mode = "one_shot" if cfg.one_shot else "hierarchical"
    patch_size = select_patch_size(q, experts.lvlm, cfg)
    if cfg.one_shot:
        patches = [Patch(pixels=crop(image, full_region(image)), offset=(0, 0), index=0)]
    else:
        patches = partition(image, patch_size, cfg.min_tile)
    trace = ScanTrace(mode=mode, patch_size=patch_size)
    trace.patches = [{"index": p.index, "bbox": p.bbox.to_list()} for p in patches]
    proxies: list[Proxy] = []
    for patch in patches:
        proxies.extend(explore_cues(patch, q, experts.search_expert, cfg))
    trace.proxies = [
        {"point": [p.point[0], p.point[1]], "score": p.score, "patch": p.source_patch}
        for p in _proxy_order(proxies)
    ]
    candidates, _visited = extract_evidence(image, proxies, experts.visual, cfg, trace)
    screened = take_k_smallest(candidates, cfg.k)
    prompt = judge_prompt(q.text)
    evidence = []
    for item in screened:
        verdict = experts.lvlm.judge(item.crop, prompt)
        item.affirmed = verdict.affirmed
        trace.judge_calls += 1
        if verdict.affirmed:
            evidence.append(item)
    trace.candidates = [
        {
            "bbox": it.bbox.to_list(),
            "tight_bbox": it.tight_bbox.to_list(),
            "area": it.bbox.area,
            "mask_area": it.mask_area,
            "discovery_index": it.discovery_index,
            "judged": it in screened,
            "affirmed": it.affirmed,
        }
        for it in candidates
    ]
    return evidence, trace
