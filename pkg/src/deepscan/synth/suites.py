"""Canonical evaluation suites built on the scene generator.

Three families back the verification story:

* grounding: fine-grained single-target scenes crowded with larger
  look-alike and unrelated distractors (the acceleration sweeps reuse it);
* refocus: centrally placed scenes mixing single-target, two-target, and
  faint-second-target layouts, sized so that no zoom-out clips at the image
  border even at two compounded steps;
* paradigm: scenes with an image-scale dominant decoy and an attention sink
  band bridging it to the target, which defeats single-pass image-level cue
  exploration but not patch-wise scanning.
"""

from __future__ import annotations

from .scenes import SceneParams

GROUNDING_BASE_SEED = 11_000
REFOCUS_BASE_SEED = 23_000
PARADIGM_BASE_SEED = 37_000


def grounding_suite_params(index: int) -> tuple[int, SceneParams]:
    """Single-target attribute scenes: 4 look-alikes + 3 plain distractors."""
    return GROUNDING_BASE_SEED + index, SceneParams(
        question_kind="attribute",
        target_area_ratio=5e-4,
        n_lookalikes=4,
        n_distractors=3,
    )


def refocus_suite_params(index: int) -> tuple[int, SceneParams]:
    """Central placement; cycles single / two-target / faint-second layouts."""
    kind = index % 3
    if kind == 0:
        params = SceneParams(
            placement="central", n_lookalikes=1, n_distractors=2, separation=56
        )
    elif kind == 1:
        params = SceneParams(
            question_kind="spatial",
            placement="central",
            n_lookalikes=1,
            n_distractors=2,
            separation=56,
        )
    else:
        params = SceneParams(
            question_kind="spatial",
            faint_second=True,
            placement="central",
            n_lookalikes=1,
            n_distractors=2,
            separation=56,
        )
    return REFOCUS_BASE_SEED + index, params


def paradigm_suite_params(index: int) -> tuple[int, SceneParams]:
    """Decoy scenes: image-scale attention 1.5x the target's, equal per patch."""
    return PARADIGM_BASE_SEED + index, SceneParams(
        question_kind="attribute",
        decoy=True,
        n_lookalikes=0,
        n_distractors=3,
    )
