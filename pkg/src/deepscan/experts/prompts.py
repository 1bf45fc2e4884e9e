"""Prompt templates for the language-model expert.

The templates are fixed strings with named substitution slots; keep them
byte-stable, since replay fixtures key on the rendered prompt.
"""

from __future__ import annotations

SYSTEM_PROMPT = (
    "You are an advanced image understanding assistant. "
    "You will be given an image and a question about it."
)

# Splits a question into the object phrases it mentions.
DECOMPOSE_TEMPLATE = (
    "Task: List objects mentioned in text in List format.\n"
    "Input text: {question}\n"
    "Action: What objects are mentioned in original text? List separated by "
    'commas. For example, from "person with white trousers on the left or right '
    'side of the person in blue", output "["person with white trousers", '
    '"person in blue"]".'
)

# Binary judgment: does a candidate crop hold a clue for the question?
JUDGE_TEMPLATE = (
    "I will provide you an image and a **question**: {question}, please firstly "
    "determine whether the image contains the clues for answering the question "
    "or not (answer with **Yes** or **No**); then give the evidence of your "
    "decision."
)

# Binary judgment: does a view fully contain every listed object?
COMPLETENESS_TEMPLATE = (
    "Question: Does the image fully contain every object in the list "
    '{target_list}? Please treat "fully contain" as entirely within the frame '
    "(not truncated by image boundaries). Please firstly answer the question "
    "with **Yes** or **No**; then give the evidence of your decision. For "
    "example, if yes, list the evidence of each object (e.g., object: bbox "
    "[x1, y1, x2, y2] or a clear region description); if no, list the missing "
    "objects by name."
)

REASON_TEMPLATE = "Question: {question}\nAnswer with the option letter."

_LETTERS = "ABCDEFGH"


def render_target_list(targets: list[str]) -> str:
    return "[" + ", ".join(f'"{t}"' for t in targets) + "]"


def judge_prompt(question_text: str) -> str:
    return JUDGE_TEMPLATE.format(question=question_text)


def completeness_prompt(targets: list[str]) -> str:
    return COMPLETENESS_TEMPLATE.format(target_list=render_target_list(targets))


def decompose_prompt(question_text: str) -> str:
    return DECOMPOSE_TEMPLATE.format(question=question_text)


def option_letter(index: int) -> str:
    return _LETTERS[index]


def present_question(text: str, options: list[str] | None) -> str:
    """The question as shown to the answering model, options enumerated."""
    if not options:
        return text
    lines = [text, "Options:"]
    lines += [f"{option_letter(i)}. {opt}" for i, opt in enumerate(options)]
    return "\n".join(lines)


def reason_prompt(text: str, options: list[str] | None) -> str:
    return REASON_TEMPLATE.format(question=present_question(text, options))
