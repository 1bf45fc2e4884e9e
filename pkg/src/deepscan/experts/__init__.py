"""Pluggable expert interfaces: search, segmentation/detection, and LVLM."""

from .base import (
    CallCounts,
    ExpertBundle,
    InstrumentedBundle,
    LvlmClient,
    LvlmOps,
    Question,
    SearchExpert,
    VisualExpert,
)
from .parsing import JudgeVerdict, extract_option_letter, parse_judgment, parse_object_list
from .remote import ENV_REMOTE_URL, WireClient, remote_bundle
from .replay import recording_bundle, replay_bundle

__all__ = [
    "Question",
    "JudgeVerdict",
    "SearchExpert",
    "VisualExpert",
    "LvlmClient",
    "LvlmOps",
    "ExpertBundle",
    "InstrumentedBundle",
    "CallCounts",
    "parse_judgment",
    "parse_object_list",
    "extract_option_letter",
    "remote_bundle",
    "replay_bundle",
    "recording_bundle",
    "WireClient",
    "ENV_REMOTE_URL",
]
