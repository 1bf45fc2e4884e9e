import numpy as np
import pytest

from deepscan.errors import InvalidInputError
from deepscan.experts import (
    InstrumentedBundle,
    Question,
    extract_option_letter,
    parse_judgment,
    parse_object_list,
)
from deepscan.experts import prompts
from deepscan.synth import SceneParams, generate_scene, oracle_bundle, scene_question
from deepscan.types import BBox


class TestJudgeParsing:
    def test_yes_affirmed(self):
        v = parse_judgment("**Yes**, the red cap is visible")
        assert v.affirmed and not v.malformed

    def test_no_not_affirmed(self):
        v = parse_judgment("No. The object is absent.")
        assert not v.affirmed and not v.malformed

    def test_neither_is_malformed(self):
        v = parse_judgment("The image shows a street scene with people.")
        assert not v.affirmed and v.malformed

    def test_yes_after_no(self):
        assert not parse_judgment("no, but yes maybe").affirmed

    def test_rule_window_is_ten_tokens(self):
        filler = "word " * 10
        assert not parse_judgment(filler + "yes").affirmed

    def test_parsing_total(self):
        for text in ("", "   ", "\n", "yes", "NO", "Yes-ish"):
            v = parse_judgment(text)
            assert isinstance(v.affirmed, bool)
            if v.malformed:
                assert not v.affirmed


class TestDecomposeParsing:
    def test_two_targets(self):
        text = '["person with white trousers", "person in blue"]'
        assert parse_object_list(text, "q") == [
            "person with white trousers",
            "person in blue",
        ]

    def test_fallback_without_brackets(self):
        assert parse_object_list("no list here", "the question") == ["the question"]

    def test_sloppy_quotes(self):
        got = parse_object_list("Sure: ['red cap', 'blue hat']", "q")
        assert got == ["red cap", "blue hat"]

    def test_empty_brackets_fall_back(self):
        assert parse_object_list("[]", "q") == ["q"]


class TestLetterExtraction:
    def test_simple(self):
        assert extract_option_letter("B) red") == "B"

    def test_lowercase(self):
        assert extract_option_letter("the answer is c.") == "C"

    def test_embedded_not_matched(self):
        assert extract_option_letter("Cabbage and Dill") is None

    def test_none(self):
        assert extract_option_letter("I cannot tell.") is None


class TestPrompts:
    def test_templates_have_slots(self):
        assert "{question}" in prompts.DECOMPOSE_TEMPLATE
        assert "{question}" in prompts.JUDGE_TEMPLATE
        assert "{target_list}" in prompts.COMPLETENESS_TEMPLATE

    def test_target_list_rendering(self):
        assert prompts.render_target_list(["a b", "c"]) == '["a b", "c"]'

    def test_present_question(self):
        text = prompts.present_question("Which?", ["x", "y"])
        assert "A. x" in text and "B. y" in text


class TestQuestion:
    def test_empty_text_rejected(self):
        with pytest.raises(InvalidInputError):
            Question(text="")

    def test_targets_fallback(self):
        q = Question(text="what is this")
        assert q.targets == ["what is this"]
        q.decomposed_targets = ["a"]
        assert q.targets == ["a"]


@pytest.fixture(scope="module")
def scene():
    img, spec = generate_scene(77, SceneParams(n_lookalikes=1, n_distractors=2))
    return img, spec


class TestOracleExperts:

    def test_search_zero_outside_matches(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        q = Question(text="nonexistent zebra query")
        s = bundle.search_expert.search(img, q)
        assert s.shape == img.shape[:2]
        assert s.max() == 0.0

    def test_search_argmax_inside_target(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        q = scene_question(spec)
        target = spec.target_objects()[0]
        from deepscan.imaging import crop

        patch = crop(img, BBox(*[max(0, target.bbox.x0 - 50), max(0, target.bbox.y0 - 50),
                                 min(img.shape[1], target.bbox.x1 + 50), min(img.shape[0], target.bbox.y1 + 50)]))
        s = bundle.search_expert.search(patch, q)
        assert s.shape == patch.shape[:2]
        iy, ix = np.unravel_index(np.argmax(s), s.shape)
        assert target.contains_point(int(ix) + patch.region.x0, int(iy) + patch.region.y0)

    def test_segment_point_in_object(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        target = spec.target_objects()[0]
        cx, cy = (int(v) for v in target.center)
        mask = bundle.visual.segment(img, (cx, cy))
        assert (mask == target.full_mask(*img.shape[:2])).all()

    def test_segment_background_empty(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        free = None
        for y in range(0, img.shape[0], 7):
            for x in range(0, img.shape[1], 7):
                if not any(o.contains_point(x, y) for o in spec.objects):
                    free = (x, y)
                    break
            if free:
                break
        mask = bundle.visual.segment(img, free)
        assert not mask.any()

    def test_detect_matches_and_clips(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        q = scene_question(spec)
        boxes = bundle.visual.detect(img, q)
        target = spec.target_objects()[0]
        assert target.bbox in boxes
        from deepscan.imaging import crop

        half = crop(img, BBox(target.bbox.x0 + target.bbox.width // 2, 0, img.shape[1], img.shape[0]))
        clipped = bundle.visual.detect(half, q)
        widths = [b.width for b in clipped]
        assert any(w < target.bbox.width for w in widths)

    def test_judge_coverage_and_monotonicity(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        from deepscan.imaging import crop
        from deepscan.experts.prompts import judge_prompt

        target = spec.target_objects()[0]
        b = target.bbox
        full = crop(img, BBox(max(b.x0 - 8, 0), max(b.y0 - 8, 0), b.x1 + 8, b.y1 + 8))
        assert bundle.lvlm.judge(full, judge_prompt(spec.question.text)).affirmed
        # ~80% coverage region: cut one side of the box.
        cut = crop(img, BBox(b.x0 + max(b.width // 4, 2), b.y0, b.x1 + 8, b.y1 + 8))
        assert not bundle.lvlm.judge(cut, judge_prompt(spec.question.text)).affirmed

    def test_decompose_oracle_roundtrip(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        q = scene_question(spec)
        targets = bundle.lvlm.decompose(q)
        assert targets == spec.targets
        assert q.decomposed_targets == spec.targets

    def test_answer_empty_question_rejected(self, scene):
        img, spec = scene
        bundle = oracle_bundle(spec)
        with pytest.raises(InvalidInputError):
            bundle.lvlm.answer([], scene_question(spec))

    def test_oracle_purity(self, scene):
        img, spec = scene
        q = scene_question(spec)
        a = oracle_bundle(spec).search_expert.search(img, q)
        b = oracle_bundle(spec).search_expert.search(img, q)
        assert (a == b).all()


class TestInstrumentation:
    def test_counts_and_latency(self, scene_bundle=None):
        img, spec = generate_scene(5, SceneParams(n_lookalikes=0, n_distractors=1))
        bundle = InstrumentedBundle.wrap(oracle_bundle(spec))
        q = scene_question(spec)
        bundle.lvlm.decompose(q)
        bundle.search_expert.search(img, q)
        bundle.visual.detect(img, q)
        assert bundle.counts.decompose == 1
        assert bundle.counts.search == 1
        assert bundle.counts.detect == 1
