"""Deterministic synthetic scenes with ground-truth masks.

Scenes render flat-colored shapes on integer noise (no floating-point
rasterization), so images are bit-reproducible per seed.  Each scene carries
a multiple-choice question, its answer, per-object ground-truth geometry, and
per-object attention gains that drive the oracle search expert.  A scene may
also carry an image-scale "attention sink" band bridging a decoy and the
target, which models saliency drifting to a dominant look-alike when the
whole image is searched at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import GenerationError, InvalidInputError
from ..types import BBox, Raster

PALETTE: dict[str, tuple[int, int, int]] = {
    "red": (200, 45, 45),
    "blue": (45, 90, 200),
    "green": (45, 165, 70),
    "yellow": (225, 205, 50),
    "purple": (150, 70, 185),
    "orange": (235, 145, 40),
    "cyan": (45, 190, 190),
    "magenta": (210, 60, 160),
}

_TARGET_ADJS = ["tiny", "small", "little", "slim"]
_OTHER_ADJS = ["big", "large", "wide", "broad", "giant", "bulky"]
_NOUNS = ["disk", "dot", "marker", "badge", "chip", "knob"]
_DISTRACTOR_NOUNS = ["tile", "slab", "panel", "block", "strip", "wedge"]


def tokenize(text: str) -> set[str]:
    return set(re.findall(r"[a-z0-9]+", text.lower()))


@dataclass
class SceneObject:
    label: str
    shape: str  # "disk" | "rect"
    color_name: str
    color: tuple[int, int, int]
    bbox: BBox
    attn_gain: float = 1.0
    attn_gain_global: float = 1.0
    is_target: bool = False
    _window_mask: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def center(self) -> tuple[float, float]:
        return ((self.bbox.x0 + self.bbox.x1 - 1) / 2.0, (self.bbox.y0 + self.bbox.y1 - 1) / 2.0)

    @property
    def radius_equiv(self) -> float:
        return max(self.bbox.width, self.bbox.height) / 2.0

    def window_mask(self) -> np.ndarray:
        """Ground-truth mask within the object's bbox window."""
        if self._window_mask is None:
            h, w = self.bbox.height, self.bbox.width
            if self.shape == "rect":
                self._window_mask = np.ones((h, w), dtype=np.uint8)
            else:
                r = (min(h, w) - 1) // 2
                ys, xs = np.mgrid[0:h, 0:w]
                cy, cx = (h - 1) // 2, (w - 1) // 2
                self._window_mask = (
                    (ys - cy) ** 2 + (xs - cx) ** 2 <= r * r
                ).astype(np.uint8)
        return self._window_mask

    def full_mask(self, height: int, width: int) -> np.ndarray:
        out = np.zeros((height, width), dtype=np.uint8)
        b = self.bbox
        out[b.y0 : b.y1, b.x0 : b.x1] = self.window_mask()
        return out

    @property
    def mask_area(self) -> int:
        return int(self.window_mask().sum())

    def contains_point(self, x: int, y: int) -> bool:
        if not self.bbox.contains_point(x, y):
            return False
        return bool(self.window_mask()[y - self.bbox.y0, x - self.bbox.x0])

    def coverage(self, region: BBox) -> float:
        """Fraction of the object's mask that lies inside `region`."""
        b = self.bbox
        ix0, iy0 = max(b.x0, region.x0), max(b.y0, region.y0)
        ix1, iy1 = min(b.x1, region.x1), min(b.y1, region.y1)
        if ix0 >= ix1 or iy0 >= iy1:
            return 0.0
        win = self.window_mask()[iy0 - b.y0 : iy1 - b.y0, ix0 - b.x0 : ix1 - b.x0]
        return float(win.sum()) / float(self.mask_area)

    def label_tokens(self) -> set[str]:
        return tokenize(self.label)


@dataclass
class SceneQuestion:
    text: str
    kind: str  # "attribute" | "spatial"
    options: list[str]
    answer_index: int

    @property
    def answer_text(self) -> str:
        return self.options[self.answer_index]


@dataclass
class SceneSpec:
    canvas_w: int
    canvas_h: int
    seed: int
    bg_base: tuple[int, int, int]
    bg_noise: int
    objects: list[SceneObject]
    question: SceneQuestion
    targets: list[str]
    sink_bbox: BBox | None = None
    sink_amp: float = 0.0

    @property
    def canvas_area(self) -> int:
        return self.canvas_w * self.canvas_h

    def target_objects(self) -> list[SceneObject]:
        by_label = {o.label: o for o in self.objects}
        return [by_label[t] for t in self.targets]

    def gt_union_bbox(self) -> BBox:
        boxes = [o.bbox for o in self.target_objects()]
        return BBox(
            min(b.x0 for b in boxes),
            min(b.y0 for b in boxes),
            max(b.x1 for b in boxes),
            max(b.y1 for b in boxes),
        )


@dataclass(frozen=True)
class SceneParams:
    canvas: int = 1024
    question_kind: str = "attribute"
    target_area_ratio: float = 5e-4
    n_lookalikes: int = 3
    n_distractors: int = 3
    decoy: bool = False  # add an image-scale dominant look-alike + sink band
    faint_second: bool = False  # spatial scenes: second target invisible to search
    placement: str = "any"  # "any" | "central"
    separation: int = 80
    margin: int = 48


def _disk_bbox(cx: int, cy: int, r: int) -> BBox:
    return BBox(cx - r, cy - r, cx + r + 1, cy + r + 1)


class _Placer:
    def __init__(self, rng: np.random.Generator, canvas: int, separation: int):
        self.rng = rng
        self.canvas = canvas
        self.sep = separation
        self.taken: list[BBox] = []

    def reserve(self, b: BBox) -> None:
        self.taken.append(b)

    def _clear(self, b: BBox) -> bool:
        for t in self.taken:
            if (
                b.x0 - self.sep < t.x1
                and t.x0 < b.x1 + self.sep
                and b.y0 - self.sep < t.y1
                and t.y0 < b.y1 + self.sep
            ):
                return False
        return True

    def place(self, w: int, h: int, region: BBox, tries: int = 400) -> BBox:
        lo_x, hi_x = region.x0, region.x1 - w
        lo_y, hi_y = region.y0, region.y1 - h
        if hi_x < lo_x or hi_y < lo_y:
            raise GenerationError(f"object {w}x{h} cannot fit region {region}")
        for _ in range(tries):
            x0 = int(self.rng.integers(lo_x, hi_x + 1))
            y0 = int(self.rng.integers(lo_y, hi_y + 1))
            b = BBox(x0, y0, x0 + w, y0 + h)
            if self._clear(b):
                self.taken.append(b)
                return b
        raise GenerationError("placement failed after bounded retries")


def generate_scene(seed: int, params: SceneParams | None = None) -> tuple[Raster, SceneSpec]:
    """Deterministically generate one scene and its ground truth."""
    p = params or SceneParams()
    if not (0.0 < p.target_area_ratio <= 0.25):
        raise InvalidInputError(
            f"target_area_ratio must be in (0, 0.25], got {p.target_area_ratio}"
        )
    if p.question_kind not in ("attribute", "spatial"):
        raise InvalidInputError(f"unknown question kind {p.question_kind}")
    rng = np.random.default_rng(seed)
    canvas = p.canvas
    if p.placement == "central":
        lo = int(canvas * 0.30)
        hi = int(canvas * 0.70)
        region = BBox(lo, lo, hi, hi)
    else:
        region = BBox(p.margin, p.margin, canvas - p.margin, canvas - p.margin)
    placer = _Placer(rng, canvas, p.separation)
    objects: list[SceneObject] = []
    color_names = list(PALETTE)

    def pick_color() -> str:
        return color_names[int(rng.integers(0, len(color_names)))]

    # Primary target.
    ratio = p.target_area_ratio * float(rng.uniform(0.9, 1.1))
    area = ratio * canvas * canvas
    side = max(9, round(np.sqrt(area)))
    r_t = max(4, (side - 1) // 2)
    noun = _NOUNS[int(rng.integers(0, len(_NOUNS)))]
    adj = _TARGET_ADJS[int(rng.integers(0, len(_TARGET_ADJS)))]
    t_color = pick_color()
    t_bbox = placer.place(2 * r_t + 1, 2 * r_t + 1, region)
    target = SceneObject(
        label=f"{adj} {noun}",
        shape="disk",
        color_name=t_color,
        color=PALETTE[t_color],
        bbox=t_bbox,
        is_target=True,
    )
    objects.append(target)
    targets = [target.label]

    second: SceneObject | None = None
    if p.question_kind == "spatial":
        adj2 = _OTHER_ADJS[int(rng.integers(0, len(_OTHER_ADJS)))]
        noun2 = _NOUNS[int(rng.integers(0, len(_NOUNS)))]
        while noun2 == noun:
            noun2 = _NOUNS[int(rng.integers(0, len(_NOUNS)))]
        c2 = pick_color()
        if p.faint_second:
            # Straddle the expected aggregated-evidence view edge so the first
            # zoom-out (and only it) recovers the full second object.
            dilate_reach = 20
            r_b = max(5, min(round(r_t * 0.55), (t_bbox.width + 2 * dilate_reach) // 4 - 1))
            side_sign = 1 if rng.random() < 0.5 else -1
            edge_x = t_bbox.x1 + dilate_reach if side_sign > 0 else t_bbox.x0 - dilate_reach
            cy = (t_bbox.y0 + t_bbox.y1 - 1) // 2 + int(rng.integers(-4, 5))
            b_bbox = _disk_bbox(edge_x, cy, r_b)
            second = SceneObject(
                label=f"{adj2} {noun2}",
                shape="disk",
                color_name=c2,
                color=PALETTE[c2],
                bbox=b_bbox,
                attn_gain=0.0,
                attn_gain_global=0.0,
                is_target=True,
            )
            placer.reserve(b_bbox)
        else:
            r_b = max(4, round(r_t * float(rng.uniform(0.8, 1.3))))
            for _ in range(200):
                b_bbox = placer.place(2 * r_b + 1, 2 * r_b + 1, region)
                if abs((b_bbox.x0 + b_bbox.x1) // 2 - (t_bbox.x0 + t_bbox.x1) // 2) >= 60:
                    break
                placer.taken.pop()
            else:
                raise GenerationError("could not separate spatial targets")
            second = SceneObject(
                label=f"{adj2} {noun2}",
                shape="disk",
                color_name=c2,
                color=PALETTE[c2],
                bbox=b_bbox,
                is_target=True,
            )
        objects.append(second)
        targets.append(second.label)

    # Look-alike distractors: share the head noun, visibly larger.
    used_adjs = {adj}
    for i in range(p.n_lookalikes):
        la = _OTHER_ADJS[(int(rng.integers(0, len(_OTHER_ADJS))) + i) % len(_OTHER_ADJS)]
        while la in used_adjs:
            la = _OTHER_ADJS[int(rng.integers(0, len(_OTHER_ADJS)))]
        used_adjs.add(la)
        r_l = max(2 * r_t, round(r_t * float(rng.uniform(2.0, 2.6))))
        c = pick_color()
        b = placer.place(2 * r_l + 1, 2 * r_l + 1, region)
        objects.append(
            SceneObject(
                label=f"{la} {noun}",
                shape="disk",
                color_name=c,
                color=PALETTE[c],
                bbox=b,
            )
        )

    sink_bbox = None
    sink_amp = 0.0
    if p.decoy:
        r_d = int(min(64, r_t * 4.5 + 10))
        c = pick_color()
        # Keep the decoy in a different default tile than the target.
        for _ in range(200):
            b = placer.place(2 * r_d + 1, 2 * r_d + 1, region)
            if (b.x0 // 576, b.y0 // 576) != (t_bbox.x0 // 576, t_bbox.y0 // 576):
                break
            placer.taken.pop()
        else:
            raise GenerationError("could not separate decoy tile from target tile")
        da = _OTHER_ADJS[int(rng.integers(0, len(_OTHER_ADJS)))]
        objects.append(
            SceneObject(
                label=f"{da} {noun} decoy",
                shape="disk",
                color_name=c,
                color=PALETTE[c],
                bbox=b,
                attn_gain=1.0,
                attn_gain_global=1.5,
            )
        )
        hull = BBox(
            min(b.x0, t_bbox.x0),
            min(b.y0, t_bbox.y0),
            max(b.x1, t_bbox.x1),
            max(b.y1, t_bbox.y1),
        )
        sink_bbox = BBox(
            max(hull.x0 - 24, 0),
            max(hull.y0 - 24, 0),
            min(hull.x1 + 24, canvas),
            min(hull.y1 + 24, canvas),
        )
        sink_amp = 0.55

    # Plain distractors with disjoint vocabulary.
    for i in range(p.n_distractors):
        dn = _DISTRACTOR_NOUNS[int(rng.integers(0, len(_DISTRACTOR_NOUNS)))]
        da = _OTHER_ADJS[int(rng.integers(0, len(_OTHER_ADJS)))]
        size_w = int(rng.integers(28, 81))
        size_h = int(rng.integers(28, 81))
        shape = "rect" if rng.random() < 0.5 else "disk"
        if shape == "disk":
            r = max(size_w, size_h) // 2
            size_w = size_h = 2 * r + 1
        c = pick_color()
        b = placer.place(size_w, size_h, region)
        objects.append(
            SceneObject(
                label=f"{da} {dn}",
                shape=shape,
                color_name=c,
                color=PALETTE[c],
                bbox=b,
            )
        )

    question = _make_question(rng, p.question_kind, target, second)
    spec = SceneSpec(
        canvas_w=canvas,
        canvas_h=canvas,
        seed=seed,
        bg_base=tuple(int(v) for v in rng.integers(70, 110, 3)),
        bg_noise=36,
        objects=objects,
        question=question,
        targets=targets,
        sink_bbox=sink_bbox,
        sink_amp=sink_amp,
    )
    return _render(rng, spec), spec


def _make_question(
    rng: np.random.Generator,
    kind: str,
    target: SceneObject,
    second: SceneObject | None,
) -> SceneQuestion:
    if kind == "attribute":
        answer = target.color_name
        others = [c for c in PALETTE if c != answer]
        picks = [answer] + [
            others[i] for i in rng.permutation(len(others))[:3].tolist()
        ]
        order = rng.permutation(len(picks)).tolist()
        options = [picks[i] for i in order]
        return SceneQuestion(
            text=f"What color is the {target.label}?",
            kind="attribute",
            options=options,
            answer_index=options.index(answer),
        )
    assert second is not None
    answer = "left" if target.center[0] < second.center[0] else "right"
    options = ["left", "right"] if rng.random() < 0.5 else ["right", "left"]
    return SceneQuestion(
        text=f"Is the {target.label} left or right of the {second.label}?",
        kind="spatial",
        options=options,
        answer_index=options.index(answer),
    )


def _render(rng: np.random.Generator, spec: SceneSpec) -> Raster:
    h, w = spec.canvas_h, spec.canvas_w
    base = np.array(spec.bg_base, dtype=np.int64)
    noise = rng.integers(0, spec.bg_noise, size=(h, w, 3))
    img = np.clip(base[None, None, :] + noise, 0, 255).astype(np.uint8)
    for obj in spec.objects:
        b = obj.bbox
        win = obj.window_mask().astype(bool)
        patch = img[b.y0 : b.y1, b.x0 : b.x1]
        patch[win] = np.array(obj.color, dtype=np.uint8)
    return Raster(img, BBox(0, 0, w, h))


# JSON (de)serialization of scene specs.


def spec_to_dict(spec: SceneSpec) -> dict[str, Any]:
    return {
        "canvas": [spec.canvas_w, spec.canvas_h],
        "seed": spec.seed,
        "background": {"base": list(spec.bg_base), "noise": spec.bg_noise},
        "objects": [
            {
                "label": o.label,
                "shape": o.shape,
                "color_name": o.color_name,
                "color": list(o.color),
                "bbox": o.bbox.to_list(),
                "attn_gain": o.attn_gain,
                "attn_gain_global": o.attn_gain_global,
                "is_target": o.is_target,
            }
            for o in spec.objects
        ],
        "question": {
            "text": spec.question.text,
            "kind": spec.question.kind,
            "options": spec.question.options,
            "answer_index": spec.question.answer_index,
        },
        "targets": spec.targets,
        "sink": (
            {"bbox": spec.sink_bbox.to_list(), "amp": spec.sink_amp}
            if spec.sink_bbox is not None
            else None
        ),
    }


def spec_from_dict(data: dict[str, Any]) -> SceneSpec:
    objects = [
        SceneObject(
            label=o["label"],
            shape=o["shape"],
            color_name=o["color_name"],
            color=tuple(o["color"]),
            bbox=BBox(*o["bbox"]),
            attn_gain=float(o.get("attn_gain", 1.0)),
            attn_gain_global=float(o.get("attn_gain_global", 1.0)),
            is_target=bool(o.get("is_target", False)),
        )
        for o in data["objects"]
    ]
    sink = data.get("sink")
    q = data["question"]
    return SceneSpec(
        canvas_w=int(data["canvas"][0]),
        canvas_h=int(data["canvas"][1]),
        seed=int(data.get("seed", 0)),
        bg_base=tuple(data["background"]["base"]),
        bg_noise=int(data["background"]["noise"]),
        objects=objects,
        question=SceneQuestion(
            text=q["text"],
            kind=q["kind"],
            options=list(q["options"]),
            answer_index=int(q["answer_index"]),
        ),
        targets=list(data["targets"]),
        sink_bbox=BBox(*sink["bbox"]) if sink else None,
        sink_amp=float(sink["amp"]) if sink else 0.0,
    )
