"""Expert interfaces: the seam isolating all model calls from the core.

A bundle holds three capabilities:

* a search expert producing a question-conditioned attention map per patch;
* a visual expert providing point-prompt segmentation and text-conditioned
  detection;
* a language-model client providing raw text completion, wrapped here into
  the decompose / judge / answer operations (prompting + parsing).

Implementations must be safely shareable across concurrent pipeline workers;
every call is independent.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from ..config import LvlmConfig
from ..errors import InvalidInputError
from ..types import BBox, Raster
from . import parsing, prompts
from .parsing import JudgeVerdict


@dataclass
class Question:
    """A natural-language question, optionally with multiple-choice options."""

    text: str
    options: list[str] | None = None
    decomposed_targets: list[str] | None = None

    def __post_init__(self):
        if not self.text:
            raise InvalidInputError("question text must be non-empty")

    @property
    def targets(self) -> list[str]:
        return self.decomposed_targets if self.decomposed_targets else [self.text]


@runtime_checkable
class SearchExpert(Protocol):
    def search(self, patch: Raster, q: Question) -> np.ndarray: ...


@runtime_checkable
class VisualExpert(Protocol):
    def segment(self, image: Raster, point: tuple[int, int]) -> np.ndarray: ...

    def detect(self, view: Raster, q: Question) -> list[BBox]: ...


@runtime_checkable
class LvlmClient(Protocol):
    def complete(
        self,
        images: list[Raster],
        prompt: str,
        system: str,
        max_tokens: int,
        temperature: float,
        seed: int,
    ) -> str: ...


class LvlmOps:
    """Prompted operations over a raw completion client."""

    def __init__(self, client: LvlmClient, cfg: LvlmConfig | None = None):
        self.client = client
        self.cfg = cfg or LvlmConfig()

    def _complete(self, images, prompt, max_tokens) -> str:
        return self.client.complete(
            images=images,
            prompt=prompt,
            system=prompts.SYSTEM_PROMPT,
            max_tokens=max_tokens,
            temperature=self.cfg.temperature,
            seed=self.cfg.seed,
        )

    def decompose(self, q: Question) -> list[str]:
        """Ask for the object phrases in the question; cache them on q."""
        text = self._complete(
            [], prompts.decompose_prompt(q.text), self.cfg.max_tokens_judgment
        )
        targets = parsing.parse_object_list(text, fallback=q.text)
        q.decomposed_targets = targets
        return targets

    def judge(self, image: Raster, prompt: str) -> JudgeVerdict:
        if image.size == 0:
            raise InvalidInputError("judge requires a non-empty image")
        text = self._complete([image], prompt, self.cfg.max_tokens_judgment)
        return parsing.parse_judgment(text)

    def answer(self, images: list[Raster], q: Question) -> str:
        if not images:
            raise InvalidInputError("answer requires at least one image")
        if not q.text:
            raise InvalidInputError("answer requires a non-empty question")
        return self._complete(
            images, prompts.reason_prompt(q.text, q.options), self.cfg.max_tokens_reason
        )


@dataclass
class ExpertBundle:
    search_expert: SearchExpert
    visual: VisualExpert
    lvlm: LvlmOps


@dataclass
class CallCounts:
    search: int = 0
    segment: int = 0
    detect: int = 0
    decompose: int = 0
    judge: int = 0
    answer: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "search": self.search,
            "segment": self.segment,
            "detect": self.detect,
            "decompose": self.decompose,
            "judge": self.judge,
            "answer": self.answer,
        }


@dataclass
class _CountingSearch:
    inner: SearchExpert
    counts: CallCounts
    lock: threading.Lock

    def search(self, patch, q):
        with self.lock:
            self.counts.search += 1
        return self.inner.search(patch, q)


@dataclass
class _CountingVisual:
    inner: VisualExpert
    counts: CallCounts
    lock: threading.Lock

    def segment(self, image, point):
        with self.lock:
            self.counts.segment += 1
        return self.inner.segment(image, point)

    def detect(self, view, q):
        with self.lock:
            self.counts.detect += 1
        return self.inner.detect(view, q)


class _CountingLvlm(LvlmOps):
    def __init__(self, inner: LvlmOps, counts: CallCounts, lock: threading.Lock, judge_latency_s: float):
        super().__init__(inner.client, inner.cfg)
        self._inner = inner
        self._counts = counts
        self._lock = lock
        self._judge_latency_s = judge_latency_s

    def decompose(self, q):
        with self._lock:
            self._counts.decompose += 1
        return self._inner.decompose(q)

    def judge(self, image, prompt):
        with self._lock:
            self._counts.judge += 1
        if self._judge_latency_s > 0:
            time.sleep(self._judge_latency_s)
        return self._inner.judge(image, prompt)

    def answer(self, images, q):
        with self._lock:
            self._counts.answer += 1
        return self._inner.answer(images, q)


@dataclass
class InstrumentedBundle:
    """Counts expert calls; optionally injects latency into judge calls."""

    search_expert: SearchExpert
    visual: VisualExpert
    lvlm: LvlmOps
    counts: CallCounts = field(default_factory=CallCounts)

    @staticmethod
    def wrap(bundle: ExpertBundle, judge_latency_s: float = 0.0) -> "InstrumentedBundle":
        counts = CallCounts()
        lock = threading.Lock()
        return InstrumentedBundle(
            search_expert=_CountingSearch(bundle.search_expert, counts, lock),
            visual=_CountingVisual(bundle.visual, counts, lock),
            lvlm=_CountingLvlm(bundle.lvlm, counts, lock, judge_latency_s),
            counts=counts,
        )
