"""Sweep evaluation: multiple-choice accuracy, cyclic permutation, grounding.

The cyclic protocol scores an item correct only when every rotation of its
options is answered correctly (a mean-over-rotations aggregation is exposed
behind a flag).  Grounding quality compares the predicted evidence region,
the union of affirmed evidence mask boxes (the full image when no evidence
survived), against the item's ground-truth box.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

from ..config import PipelineConfig
from ..errors import DeepscanError
from ..experts.base import ExpertBundle, Question
from ..experts.parsing import extract_option_letter
from ..imaging import iou
from ..reasoning import RunTrace, run_pipeline
from ..types import BBox, Raster, full_region
from .bench import BenchItem, letter_for
from .pngio import read_png

HIT_THRESHOLD = 0.5


def rotate_options(options: tuple[str, ...], r: int) -> tuple[tuple[str, ...], int, Callable[[int], int]]:
    """Rotation r of the options; returns (rotated, shift) mapping helper."""
    n = len(options)
    rotated = tuple(options[(i + r) % n] for i in range(n))
    return rotated, r, lambda old: (old - r) % n


class ItemRunner(Protocol):
    def run(self, item: BenchItem, question: Question) -> "RunOutcome": ...


@dataclass
class RunOutcome:
    answer_text: str
    grounding_bbox: BBox | None = None
    scan_judge_calls: int = 0
    trace: RunTrace | None = None
    error: str | None = None


def grounding_region_from_trace(trace: RunTrace, image_box: BBox) -> BBox:
    """Union of affirmed evidence mask boxes; full image when none survived."""
    tight = [
        BBox(*c["tight_bbox"])
        for c in trace.scan.get("candidates", [])
        if c.get("affirmed")
    ]
    if tight:
        return BBox(
            min(b.x0 for b in tight),
            min(b.y0 for b in tight),
            max(b.x1 for b in tight),
            max(b.y1 for b in tight),
        )
    return image_box


class PipelineRunner:
    """Runs the full pipeline for each item via an expert-bundle factory."""

    def __init__(
        self,
        bundle_factory: Callable[[BenchItem], ExpertBundle],
        cfg: PipelineConfig | None = None,
        image_loader: Callable[[BenchItem], Raster] = None,
    ):
        self.bundle_factory = bundle_factory
        self.cfg = cfg or PipelineConfig()
        self.image_loader = image_loader or (lambda item: read_png(item.image_path))

    def run(self, item: BenchItem, question: Question) -> RunOutcome:
        image = self.image_loader(item)
        bundle = self.bundle_factory(item)
        try:
            answer, trace = run_pipeline(image, question, bundle, self.cfg)
        except DeepscanError as exc:
            trace = getattr(exc, "trace", None)
            return RunOutcome(answer_text="", trace=trace, error=str(exc))
        return RunOutcome(
            answer_text=answer,
            grounding_bbox=grounding_region_from_trace(trace, full_region(image)),
            scan_judge_calls=int(trace.scan.get("judge_calls", 0)),
            trace=trace,
        )


@dataclass
class ItemResult:
    id: str
    subset: str | None
    score: float  # 1.0/0.0 under all-rotations; fraction under mean aggregation
    letters: list[str | None]
    expected: list[str]
    answer_raw: str
    iou: float | None = None
    hit: bool | None = None
    scan_judge_calls: int = 0
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "subset": self.subset,
            "score": self.score,
            "letters": self.letters,
            "expected": self.expected,
            "answer_raw": self.answer_raw,
            "iou": self.iou,
            "hit": self.hit,
            "scan_judge_calls": self.scan_judge_calls,
            "error": self.error,
        }

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "ItemResult":
        return ItemResult(
            id=data["id"],
            subset=data.get("subset"),
            score=float(data["score"]),
            letters=list(data.get("letters", [])),
            expected=list(data.get("expected", [])),
            answer_raw=data.get("answer_raw", ""),
            iou=data.get("iou"),
            hit=data.get("hit"),
            scan_judge_calls=int(data.get("scan_judge_calls", 0)),
            error=data.get("error"),
        )


@dataclass
class EvalReport:
    n: int
    mode: str
    accuracy: float
    subset_accuracy: dict[str, float]
    miou: float | None
    hit_at_05: float | None
    mean_scan_judge_calls: float
    n_errors: int
    wall_time_s: float = 0.0  # informational; kept out of the canonical bytes
    results: list[ItemResult] = field(default_factory=list)

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        out = {
            "n": self.n,
            "mode": self.mode,
            "accuracy": self.accuracy,
            "subset_accuracy": self.subset_accuracy,
            "miou": self.miou,
            "hit_at_0.5": self.hit_at_05,
            "mean_scan_judge_calls": self.mean_scan_judge_calls,
            "n_errors": self.n_errors,
            "items": [r.to_dict() for r in self.results],
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time_s
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(
            self.to_dict(include_timing), sort_keys=True, separators=(",", ":")
        )


def _evaluate_item(
    item: BenchItem, runner: ItemRunner, mode: str, cyclic_agg: str
) -> tuple[ItemResult, dict[str, Any] | None]:
    n = len(item.options)
    rotations = range(n) if mode == "cyclic" else range(1)
    letters: list[str | None] = []
    expected: list[str] = []
    flags: list[bool] = []
    first: RunOutcome | None = None
    answer_raw = ""
    error = None
    for r in rotations:
        rotated, _, remap = rotate_options(item.options, r)
        expected_letter = letter_for(remap(item.answer_index))
        question = Question(text=item.question, options=list(rotated))
        outcome = runner.run(item, question)
        if r == 0:
            first = outcome
            answer_raw = outcome.answer_text
        if outcome.error is not None:
            error = outcome.error
            letters.append(None)
            expected.append(expected_letter)
            flags.append(False)
            continue
        letter = extract_option_letter(outcome.answer_text)
        letters.append(letter)
        expected.append(expected_letter)
        flags.append(letter == expected_letter)
    if cyclic_agg == "mean" and mode == "cyclic":
        score = sum(flags) / len(flags)
    else:
        score = 1.0 if all(flags) else 0.0
    result = ItemResult(
        id=item.id,
        subset=item.subset,
        score=score,
        letters=letters,
        expected=expected,
        answer_raw=answer_raw,
        scan_judge_calls=first.scan_judge_calls if first else 0,
        error=error,
    )
    if item.gt_bbox is not None and first is not None and first.grounding_bbox is not None:
        result.iou = iou(first.grounding_bbox, item.gt_bbox)
        result.hit = result.iou >= HIT_THRESHOLD
    trace_dict = None
    if first is not None and first.trace is not None:
        trace_dict = first.trace.to_dict()
    return result, trace_dict


def _trace_path(trace_dir: Path, item: BenchItem) -> Path:
    return trace_dir / f"item_{item.id}.json"


def evaluate(
    items: list[BenchItem],
    runner: ItemRunner,
    mode: str = "plain",
    jobs: int = 1,
    cyclic_agg: str = "all",
    trace_dir: str | Path | None = None,
    resume: bool = False,
) -> EvalReport:
    """Evaluate all items; failures score 0 and never abort the sweep."""
    if mode not in ("plain", "cyclic"):
        raise ValueError(f"unknown mode {mode!r}")
    if cyclic_agg not in ("all", "mean"):
        raise ValueError(f"unknown cyclic aggregation {cyclic_agg!r}")
    tdir = Path(trace_dir) if trace_dir else None
    if tdir:
        tdir.mkdir(parents=True, exist_ok=True)

    def work(item: BenchItem) -> ItemResult:
        if tdir and resume:
            cached = _trace_path(tdir, item)
            if cached.exists():
                with cached.open() as fh:
                    return ItemResult.from_dict(json.load(fh)["result"])
        trace_dict = None
        try:
            result, trace_dict = _evaluate_item(item, runner, mode, cyclic_agg)
        except Exception as exc:  # defensive: an item failure must not kill the sweep
            result = ItemResult(
                id=item.id,
                subset=item.subset,
                score=0.0,
                letters=[],
                expected=[],
                answer_raw="",
                error=f"{type(exc).__name__}: {exc}",
            )
        if tdir:
            payload = {"result": result.to_dict(), "trace": trace_dict}
            tmp = _trace_path(tdir, item).with_suffix(".tmp")
            with tmp.open("w") as fh:
                json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
            tmp.replace(_trace_path(tdir, item))
        return result

    start = time.perf_counter()
    if jobs <= 1:
        results = [work(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, items))
    wall = time.perf_counter() - start

    n = len(results)
    accuracy = sum(r.score for r in results) / n if n else 0.0
    subsets: dict[str, list[float]] = {}
    for r in results:
        if r.subset:
            subsets.setdefault(r.subset, []).append(r.score)
    subset_accuracy = {k: sum(v) / len(v) for k, v in sorted(subsets.items())}
    with_iou = [r.iou for r in results if r.iou is not None]
    miou = sum(with_iou) / len(with_iou) if with_iou else None
    hits = [r.hit for r in results if r.hit is not None]
    hit_at_05 = sum(hits) / len(hits) if hits else None
    mean_judge = sum(r.scan_judge_calls for r in results) / n if n else 0.0
    return EvalReport(
        n=n,
        mode=mode,
        accuracy=accuracy,
        subset_accuracy=subset_accuracy,
        miou=miou,
        hit_at_05=hit_at_05,
        mean_scan_judge_calls=mean_judge,
        n_errors=sum(1 for r in results if r.error),
        wall_time_s=wall,
        results=results,
    )
