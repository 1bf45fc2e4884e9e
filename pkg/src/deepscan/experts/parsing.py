"""Response parsing for the language-model expert.

Parsing is total: any string yields a verdict / target list / letter-or-None.
Judgment defaults to "not affirmed" so that format drift drops evidence
instead of inventing it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass


@dataclass(frozen=True)
class JudgeVerdict:
    affirmed: bool
    rationale: str
    malformed: bool = False


def parse_judgment(text: str) -> JudgeVerdict:
    """Affirmed iff "yes" occurs before "no" within the first 10 tokens."""
    prefix = " ".join(text.split()[:10]).lower()
    yes = prefix.find("yes")
    no = prefix.find("no")
    if yes < 0 and no < 0:
        return JudgeVerdict(affirmed=False, rationale=text, malformed=True)
    affirmed = yes >= 0 and (no < 0 or yes < no)
    return JudgeVerdict(affirmed=affirmed, rationale=text)


def parse_object_list(text: str, fallback: str) -> list[str]:
    """Extract a bracketed comma-separated object list; on failure return
    [fallback] so the pipeline stays total under format drift."""
    start = text.find("[")
    end = text.rfind("]")
    if start < 0 or end <= start:
        return [fallback]
    inner = text[start : end + 1]
    items: list[str] = []
    try:
        parsed = json.loads(inner)
        if isinstance(parsed, list):
            items = [str(p).strip() for p in parsed]
    except (json.JSONDecodeError, ValueError):
        items = [part.strip().strip("\"'") for part in inner[1:-1].split(",")]
    items = [it for it in (i.strip() for i in items) if it]
    return items if items else [fallback]


_LETTER_RE = re.compile(r"\b([A-Da-d])\b")


def extract_option_letter(text: str) -> str | None:
    """First standalone A-D token, case-insensitive; None when absent."""
    m = _LETTER_RE.search(text)
    return m.group(1).upper() if m else None
