"""Bottom-up visual evidence localization and evidence-grounded answering.

The pipeline localizes fine-grained evidence by scanning image patches for
attention cues, lifts the cues to point prompts for a segmenter, recalibrates
the aggregated evidence view with a small pruned zoom search, and answers from
an ordered multi-image evidence memory.  All model calls sit behind pluggable
expert interfaces, so the full algorithmic core runs against deterministic
synthetic oracles.
"""

__version__ = "0.1.0"
