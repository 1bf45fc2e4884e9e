"""Benchmark ingestion, metrics, CLI, and trace/overlay emission."""

from .bench import BenchItem, index_for, letter_for, load_bench
from .evaluate import (
    EvalReport,
    ItemResult,
    PipelineRunner,
    RunOutcome,
    evaluate,
    grounding_region_from_trace,
    rotate_options,
)
from .pngio import read_png, write_png

__all__ = [
    "BenchItem",
    "load_bench",
    "letter_for",
    "index_for",
    "evaluate",
    "EvalReport",
    "ItemResult",
    "PipelineRunner",
    "RunOutcome",
    "rotate_options",
    "grounding_region_from_trace",
    "read_png",
    "write_png",
]
