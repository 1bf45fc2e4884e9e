"""Deterministic expert backends driven by scene ground truth.

Every oracle is a pure function of (scene spec, inputs).  Crops identify
themselves to the oracles through their region provenance, so no pixel
matching is involved.  The judgment indicator is monotone under region
growth, which the refocusing search-space guarantees rely on.
"""

from __future__ import annotations

import re

import numpy as np

from ..config import LvlmConfig
from ..errors import InvalidInputError
from ..types import BBox, Raster
from ..experts import prompts
from ..experts.base import ExpertBundle, LvlmOps, Question
from .scenes import SceneObject, SceneSpec, tokenize

# A prompted target counts as shown when at least this fraction of its mask
# lies inside the presented region.
FULL_COVERAGE = 0.99
# The answering oracle only "sees" an object occupying at least this fraction
# of the presented image; below it the model guesses a fixed wrong option.
MIN_VISIBLE_RATIO = 0.01
# A search call whose patch covers at least this fraction of the canvas uses
# the image-scale attention gains (and the sink band, when present).
IMAGE_SCALE_FRAC = 0.5
# Attention bumps are clipped to zero beyond this many sigmas.
BUMP_CUTOFF_SIGMAS = 4.0


def _region_of(image: Raster) -> BBox:
    region = getattr(image, "region", None)
    if region is None:
        raise InvalidInputError("oracle backends require region provenance on images")
    return region


def _matching_objects(spec: SceneSpec, query: str) -> list[SceneObject]:
    qtokens = tokenize(query)
    return [o for o in spec.objects if o.label_tokens() & qtokens]


class OracleSearchExpert:
    def __init__(self, spec: SceneSpec):
        self.spec = spec

    def search(self, patch: Raster, q: Question) -> np.ndarray:
        region = _region_of(patch)
        h, w = patch.shape[:2]
        out = np.zeros((h, w), dtype=np.float64)
        image_scale = region.area >= IMAGE_SCALE_FRAC * self.spec.canvas_area
        for obj in _matching_objects(self.spec, q.text):
            gain = obj.attn_gain_global if image_scale else obj.attn_gain
            if gain <= 0.0:
                continue
            self._add_bump(out, region, obj, gain)
        if image_scale and self.spec.sink_bbox is not None:
            self._add_band(out, region, self.spec.sink_bbox, self.spec.sink_amp)
        return out

    @staticmethod
    def _add_bump(out: np.ndarray, region: BBox, obj: SceneObject, gain: float) -> None:
        cx, cy = obj.center
        sigma = max(obj.radius_equiv / 2.0, 1.0)
        reach = BUMP_CUTOFF_SIGMAS * sigma
        x0 = max(int(np.floor(cx - reach)), region.x0)
        x1 = min(int(np.ceil(cx + reach)) + 1, region.x1)
        y0 = max(int(np.floor(cy - reach)), region.y0)
        y1 = min(int(np.ceil(cy + reach)) + 1, region.y1)
        if x0 >= x1 or y0 >= y1:
            return
        ys = np.arange(y0, y1, dtype=np.float64) - cy
        xs = np.arange(x0, x1, dtype=np.float64) - cx
        dsq = ys[:, None] ** 2 + xs[None, :] ** 2
        bump = gain * np.exp(-dsq / (2.0 * sigma * sigma))
        bump[dsq > reach * reach] = 0.0
        window = out[y0 - region.y0 : y1 - region.y0, x0 - region.x0 : x1 - region.x0]
        np.maximum(window, bump, out=window)

    @staticmethod
    def _add_band(out: np.ndarray, region: BBox, band: BBox, amp: float) -> None:
        x0, y0 = max(band.x0, region.x0), max(band.y0, region.y0)
        x1, y1 = min(band.x1, region.x1), min(band.y1, region.y1)
        if x0 >= x1 or y0 >= y1:
            return
        window = out[y0 - region.y0 : y1 - region.y0, x0 - region.x0 : x1 - region.x0]
        np.maximum(window, amp, out=window)


class OracleVisualExpert:
    def __init__(self, spec: SceneSpec):
        self.spec = spec

    def segment(self, image: Raster, point: tuple[int, int]) -> np.ndarray:
        h, w = image.shape[:2]
        x, y = int(point[0]), int(point[1])
        if not (0 <= x < w and 0 <= y < h):
            raise InvalidInputError(f"point {point} outside {w}x{h} image")
        for obj in self.spec.objects:
            if obj.contains_point(x, y):
                return obj.full_mask(h, w)
        return np.zeros((h, w), dtype=np.uint8)

    def detect(self, view: Raster, q: Question) -> list[BBox]:
        region = _region_of(view)
        boxes = []
        for obj in _matching_objects(self.spec, q.text):
            b = obj.bbox
            ix0, iy0 = max(b.x0, region.x0), max(b.y0, region.y0)
            ix1, iy1 = min(b.x1, region.x1), min(b.y1, region.y1)
            if ix0 < ix1 and iy0 < iy1:
                boxes.append(
                    BBox(ix0 - region.x0, iy0 - region.y0, ix1 - region.x0, iy1 - region.y0)
                )
        return boxes


_OPTION_LINE = re.compile(r"^([A-H])\. (.*)$", re.MULTILINE)


class OracleLvlmClient:
    """Scene-grounded completions for the fixed prompt templates.

    Responses are ordinary model-looking strings, so the production parsing
    paths stay exercised during oracle runs.
    """

    def __init__(self, spec: SceneSpec):
        self.spec = spec

    def complete(self, images, prompt, system, max_tokens, temperature, seed) -> str:
        if prompt.startswith("Task: List objects mentioned"):
            return prompts.render_target_list(self.spec.targets)
        if prompt.startswith("I will provide you an image and a **question**"):
            return self._judge_clue(images)
        if prompt.startswith("Question: Does the image fully contain every object"):
            return self._judge_complete(images)
        if prompt.startswith("Question: "):
            return self._answer(images, prompt)
        return "unclear"

    def _shown(self, obj: SceneObject, region: BBox) -> bool:
        return obj.coverage(region) >= FULL_COVERAGE

    def _judge_clue(self, images) -> str:
        # Clue containment: some question target is fully shown in the crop.
        region = _region_of(images[0])
        for obj in self.spec.target_objects():
            if self._shown(obj, region):
                return f"**Yes**, the image shows the {obj.label}."
        return "**No**, the region holds no evidence for the question."

    def _judge_complete(self, images) -> str:
        # View completeness: every question target fully inside the frame.
        region = _region_of(images[0])
        missing = [
            obj.label for obj in self.spec.target_objects() if not self._shown(obj, region)
        ]
        if missing:
            return "**No**, missing: " + ", ".join(missing) + "."
        lines = ", ".join(
            f"{obj.label}: bbox {obj.bbox.to_list()}" for obj in self.spec.target_objects()
        )
        return f"**Yes**, every object is fully visible. Evidence: {lines}"

    def _visible(self, obj: SceneObject, images) -> bool:
        for image in images:
            region = _region_of(image)
            if not self._shown(obj, region):
                continue
            if obj.mask_area / region.area >= MIN_VISIBLE_RATIO:
                return True
        return False

    def _answer(self, images, prompt: str) -> str:
        informed = all(self._visible(obj, images) for obj in self.spec.target_objects())
        options = _OPTION_LINE.findall(prompt)
        answer_text = self.spec.question.answer_text
        if not options:
            return answer_text if informed else "unclear"
        if informed:
            for letter, text in options:
                if text.strip() == answer_text:
                    return f"{letter}. {text.strip()}"
            return "unclear"
        # Uninformed: deterministic wrong pick (first non-answer option).
        for letter, text in options:
            if text.strip() != answer_text:
                return f"{letter}. {text.strip()}"
        return options[0][0]


def oracle_bundle(spec: SceneSpec, lvlm_cfg: LvlmConfig | None = None) -> ExpertBundle:
    return ExpertBundle(
        search_expert=OracleSearchExpert(spec),
        visual=OracleVisualExpert(spec),
        lvlm=LvlmOps(OracleLvlmClient(spec), lvlm_cfg),
    )


def scene_question(spec: SceneSpec) -> Question:
    return Question(text=spec.question.text, options=list(spec.question.options))


def full_scene_region(spec: SceneSpec) -> BBox:
    return BBox(0, 0, spec.canvas_w, spec.canvas_h)
