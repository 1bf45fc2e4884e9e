"""Benchmark ingestion: JSONL items with strict schema validation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import BenchSchemaError
from ..types import BBox

_LETTERS = "ABCDEFGH"


def letter_for(index: int) -> str:
    return _LETTERS[index]


def index_for(letter: str) -> int:
    return _LETTERS.index(letter.upper())


@dataclass(frozen=True)
class BenchItem:
    id: str
    image_path: Path
    question: str
    options: tuple[str, ...]
    answer_index: int
    gt_bbox: BBox | None = None
    subset: str | None = None

    @property
    def answer_letter(self) -> str:
        return letter_for(self.answer_index)


def _parse_item(record: dict, base: Path, line: int) -> BenchItem:
    for key in ("image", "question", "options", "answer"):
        if key not in record:
            raise BenchSchemaError(f"missing required field {key!r}", line)
    options = record["options"]
    if not isinstance(options, list) or not (2 <= len(options) <= 4):
        raise BenchSchemaError(f"options must be a list of 2-4 strings, got {options!r}", line)
    if not all(isinstance(o, str) and o for o in options):
        raise BenchSchemaError("options must be non-empty strings", line)
    answer = record["answer"]
    if not isinstance(answer, str) or answer.upper() not in _LETTERS[: len(options)]:
        raise BenchSchemaError(
            f"answer must be one of {list(_LETTERS[: len(options)])}, got {answer!r}", line
        )
    question = record["question"]
    if not isinstance(question, str) or not question:
        raise BenchSchemaError("question must be a non-empty string", line)
    gt_bbox = None
    if record.get("gt_bbox") is not None:
        raw = record["gt_bbox"]
        if not (isinstance(raw, list) and len(raw) == 4):
            raise BenchSchemaError(f"gt_bbox must be [x0, y0, x1, y1], got {raw!r}", line)
        try:
            gt_bbox = BBox(*(int(v) for v in raw)).validate()
        except Exception as exc:
            raise BenchSchemaError(f"invalid gt_bbox {raw!r}: {exc}", line) from exc
    image_path = Path(record["image"])
    if not image_path.is_absolute():
        image_path = base / image_path
    return BenchItem(
        id=str(record.get("id", line)),
        image_path=image_path,
        question=question,
        options=tuple(options),
        answer_index=index_for(answer),
        gt_bbox=gt_bbox,
        subset=record.get("subset"),
    )


def load_bench(path: str | Path) -> list[BenchItem]:
    """Load a JSONL benchmark; relative image paths resolve against the file."""
    path = Path(path)
    base = path.parent
    items = []
    with path.open() as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BenchSchemaError(f"invalid JSON: {exc}", line_no) from exc
            if not isinstance(record, dict):
                raise BenchSchemaError("each line must be a JSON object", line_no)
            items.append(_parse_item(record, base, line_no))
    return items
