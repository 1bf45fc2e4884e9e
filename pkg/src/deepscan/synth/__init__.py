"""Synthetic scenes and scene-grounded oracle experts."""

from .oracles import (
    FULL_COVERAGE,
    IMAGE_SCALE_FRAC,
    MIN_VISIBLE_RATIO,
    OracleLvlmClient,
    OracleSearchExpert,
    OracleVisualExpert,
    oracle_bundle,
    scene_question,
)
from .scenes import (
    PALETTE,
    SceneObject,
    SceneParams,
    SceneQuestion,
    SceneSpec,
    generate_scene,
    spec_from_dict,
    spec_to_dict,
    tokenize,
)
from .suites import grounding_suite_params, paradigm_suite_params, refocus_suite_params

__all__ = [
    "SceneObject",
    "SceneQuestion",
    "SceneSpec",
    "SceneParams",
    "PALETTE",
    "generate_scene",
    "spec_to_dict",
    "spec_from_dict",
    "tokenize",
    "oracle_bundle",
    "scene_question",
    "grounding_suite_params",
    "refocus_suite_params",
    "paradigm_suite_params",
    "OracleSearchExpert",
    "OracleVisualExpert",
    "OracleLvlmClient",
    "FULL_COVERAGE",
    "MIN_VISIBLE_RATIO",
    "IMAGE_SCALE_FRAC",
]
