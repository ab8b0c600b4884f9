import json

import pytest

from trforge.errors import ParseError, ValidationError
from trforge.evalkit import (
    ADAPTERS,
    DEFAULT_TARGETS,
    EVAL_GEN_TEMPERATURE,
    JUDGE_TEMPERATURE,
    EvalRecord,
    compute_report,
    fontsize_plan,
    fontsize_score,
    from_docvqa,
    from_ocrvqa,
    from_stvqa,
    from_textvqa,
    gen_read_eval_questions,
    judge_relative,
    load_judge_prompt,
    merge_predictions,
    parse_judge_reply,
    read_records,
    write_records,
)
from trforge.llmclient import ReplayClient


def rec(qid="q1", answers=("yes",), prediction="", image_id="im1"):
    return EvalRecord(
        qid=qid,
        image_id=image_id,
        question="what does it say?",
        gt_answers=tuple(answers),
        prediction=prediction,
    )


class TestRecords:
    def test_validation(self):
        with pytest.raises(ValidationError):
            EvalRecord(qid="", image_id="i", question="q", gt_answers=("a",))
        with pytest.raises(ValidationError):
            EvalRecord(qid="q", image_id="i", question="q", gt_answers=())
        with pytest.raises(ValidationError):
            EvalRecord(qid="q", image_id="i", question="q", gt_answers=("a", ""))

    def test_file_round_trip(self, tmp_path):
        records = [rec("a"), rec("b", answers=("x", "y"), prediction="p")]
        path = tmp_path / "r.jsonl"
        assert write_records(records, path) == 2
        assert read_records(path) == records

    def test_duplicate_qid_on_read(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_records([rec("a")], path)
        with open(path, "a") as f:
            f.write(json.dumps({"qid": "a", "gt_answers": ["z"]}) + "\n")
        with pytest.raises(ValidationError, match="duplicate qid"):
            read_records(path)

    def test_merge_predictions(self):
        records = [rec("a"), rec("b"), rec("c")]
        merged, missing = merge_predictions(records, {"a": "pa", "c": "pc"})
        assert [r.prediction for r in merged] == ["pa", "", "pc"]
        assert missing == ["b"]
        # originals untouched (frozen dataclass, replace-based merge)
        assert records[0].prediction == ""


class TestAdapters:
    def test_stvqa(self):
        doc = {
            "data": [
                {
                    "question_id": 7,
                    "question": "what brand?",
                    "answers": ["coca cola", "coke"],
                    "file_path": "imgs/7.jpg",
                }
            ]
        }
        [r] = from_stvqa(doc)
        assert r.qid == "7"
        assert r.image_id == "imgs/7.jpg"
        assert r.gt_answers == ("coca cola", "coke")

    def test_textvqa(self):
        doc = {
            "data": [
                {
                    "question_id": "q1",
                    "question": "what time?",
                    "answers": ["noon"],
                    "image_id": "abc",
                }
            ]
        }
        [r] = from_textvqa(doc)
        assert (r.qid, r.image_id) == ("q1", "abc")

    def test_ocrvqa_positional_pairing(self):
        doc = {
            "im1": {"questions": ["who?", "when?"], "answers": ["me", "now"]},
        }
        rows = from_ocrvqa(doc)
        assert [r.qid for r in rows] == ["im1:0", "im1:1"]
        assert rows[1].gt_answers == ("now",)

    def test_ocrvqa_length_mismatch(self):
        doc = {"im1": {"questions": ["a?"], "answers": ["x", "y"]}}
        with pytest.raises(ValidationError, match="im1"):
            from_ocrvqa(doc)

    def test_docvqa(self):
        doc = {
            "data": [
                {
                    "questionId": 3,
                    "question": "total?",
                    "answers": ["$5.00"],
                    "image": "doc.png",
                }
            ]
        }
        [r] = from_docvqa(doc)
        assert (r.qid, r.image_id) == ("3", "doc.png")

    def test_registry(self):
        assert set(ADAPTERS) == {"stvqa", "textvqa", "ocrvqa", "docvqa"}

    def test_missing_data_key(self):
        with pytest.raises(ValidationError):
            from_stvqa({})


class TestReport:
    def test_small_batch_hand_checked(self):
        records = [
            rec("q1", answers=("hello",), prediction="it says hello there"),
            rec("q2", answers=("goodbye",), prediction="no idea"),
        ]
        report = compute_report(records)
        agg = report["aggregate"]
        assert agg["n"] == 2
        assert agg["accuracy"] == pytest.approx(0.5)
        assert report["per_record"][0]["accuracy"] == 1
        assert report["per_record"][1]["accuracy"] == 0
        assert report["per_record"][0]["partial_class"] == "correct"
        assert 0.0 <= agg["anls"] <= 1.0
        assert "cider_d" in report["per_record"][0]

    def test_single_record_skips_cider(self):
        report = compute_report([rec("q1", prediction="yes")])
        assert report["aggregate"]["cider_d"] is None
        assert "cider_d" not in report["per_record"][0]

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            compute_report([])

    def test_percentages(self):
        records = [
            rec("a", answers=("sandra boynton",), prediction="by sandra boynton"),
            rec("b", answers=("sandra boynton",), prediction="by sandra byington"),
            rec("c", answers=("sandra boynton",), prediction="a cat"),
            rec("d", answers=("sandra boynton",), prediction="sandra boynton"),
        ]
        agg = compute_report(records)["aggregate"]
        assert agg["correct_pct"] == pytest.approx(50.0)
        assert agg["partial_pct"] == pytest.approx(25.0)


class TestJudge:
    def test_temperatures(self):
        assert JUDGE_TEMPERATURE == 0.2
        assert EVAL_GEN_TEMPERATURE == 0.7

    def test_prompt_template_slots(self):
        prompt = load_judge_prompt()
        for slot in ("{question}", "{context}", "{answer_candidate}", "{answer_reference}"):
            assert slot in prompt["user_template"]
        assert prompt["system"]

    def test_parse_reply(self):
        cand, ref, rationale = parse_judge_reply("8 10\nThe candidate missed a detail.")
        assert (cand, ref) == (8.0, 10.0)
        assert rationale == "The candidate missed a detail."

    def test_parse_reply_commas_and_floats(self):
        cand, ref, _ = parse_judge_reply("7.5, 9\n")
        assert (cand, ref) == (7.5, 9.0)

    def test_parse_reply_errors(self):
        for bad in ("", "only prose", "8\nrest", "8 9 10", "eight nine", "0 5", "5 11"):
            with pytest.raises(ParseError):
                parse_judge_reply(bad)

    def test_judge_relative_via_replay(self):
        client = ReplayClient({"q1": "6 8\nCandidate is terser."})
        outcome = judge_relative(
            "q1", "what is shown?", "OCR: hello", "cand answer", "ref answer", client
        )
        assert outcome.qid == "q1"
        assert outcome.score_candidate == 6.0
        assert outcome.score_reference == 8.0
        assert outcome.relative_pct == pytest.approx(75.0)
        assert outcome.rationale == "Candidate is terser."

    def test_judge_request_shape(self):
        captured = {}

        class SpyClient:
            def chat(self, req):
                captured["req"] = req

                class R:
                    text = "5 5\nok"

                return R()

        judge_relative("qx", "Q?", "CTX", "A1", "A2", SpyClient())
        req = captured["req"]
        assert req.temperature == JUDGE_TEMPERATURE
        assert req.request_id == "qx"
        user = req.messages[1]["content"]
        # candidate appears before reference in the rendered prompt
        assert user.index("A1") < user.index("A2")
        assert "Q?" in user and "CTX" in user

    def test_bad_reply_raises(self):
        client = ReplayClient({"q1": "no scores here at all"})
        with pytest.raises(ParseError):
            judge_relative("q1", "q", "c", "a", "b", client)


class TestGenReadEval:
    def test_questions_extracted(self):
        reply = (
            "Question: What does the sign say?\n"
            "Answer: It says STOP.\n"
            "Question: What color is it?\n"
            "Answer: Red."
        )
        client = ReplayClient({"im1": reply})
        qs = gen_read_eval_questions("im1", "STOP", "a red sign", client)
        assert qs == ["What does the sign say?", "What color is it?"]

    def test_request_layout(self):
        captured = {}

        class SpyClient:
            def chat(self, req):
                captured["req"] = req

                class R:
                    text = "Question: q?\nAnswer: a."

                return R()

        gen_read_eval_questions("im2", "OCR TEXT", "caption here", SpyClient())
        req = captured["req"]
        assert req.temperature == EVAL_GEN_TEMPERATURE
        assert req.messages[1]["content"] == "OCR TEXT\ncaption here"
        assert req.messages[0]["content"]  # instruction block is non-empty

    def test_empty_inputs_rejected(self):
        client = ReplayClient({})
        with pytest.raises(ValidationError):
            gen_read_eval_questions("im3", "", "", client)

    def test_caption_only_ok(self):
        client = ReplayClient({"im4": "Question: q?\nAnswer: a."})
        assert gen_read_eval_questions("im4", "", "just a caption", client) == ["q?"]


class TestFontSizePlan:
    def test_default_targets(self):
        assert DEFAULT_TARGETS == tuple(range(3, 20))
        assert len(DEFAULT_TARGETS) == 17

    def test_scales(self):
        records = [(rec("q1"), 10.0), (rec("q2"), 38.0)]
        jobs, skipped = fontsize_plan(records, targets=(19, 3))
        assert skipped == 0
        assert [(j.qid, j.target_height_px) for j in jobs] == [
            ("q1", 3), ("q1", 19), ("q2", 3), ("q2", 19),
        ]
        assert jobs[0].scale == pytest.approx(0.3)
        assert jobs[1].scale == pytest.approx(1.9)
        assert jobs[2].scale == pytest.approx(3 / 38)
        assert jobs[3].scale == pytest.approx(0.5)

    def test_skips_non_positive_heights(self):
        records = [(rec("q1"), 0.0), (rec("q2"), -4.0), (rec("q3"), 12.0)]
        jobs, skipped = fontsize_plan(records, targets=(5,))
        assert skipped == 2
        assert [j.qid for j in jobs] == ["q3"]

    def test_bad_targets(self):
        with pytest.raises(ValidationError):
            fontsize_plan([(rec(), 5.0)], targets=())
        with pytest.raises(ValidationError):
            fontsize_plan([(rec(), 5.0)], targets=(0, 4))


class TestFontSizeScore:
    def test_bins_and_missing(self):
        records = [
            (rec("q1", answers=("stop",)), 10.0),
            (rec("q2", answers=("go",)), 20.0),
            (rec("q3", answers=("x",)), 0.0),  # unscorable, excluded
        ]
        predictions = {
            ("q1", 3): "blurry",
            ("q2", 3): "it says go",
            ("q1", 12): "sign says stop",
            ("q2", 12): "the word go",
        }
        bins = fontsize_score(predictions, records, targets=(3, 12))
        assert [b.target_height_px for b in bins] == [3, 12]
        small, large = bins
        assert small.n == 2 and small.accuracy == pytest.approx(0.5)
        assert large.accuracy == pytest.approx(1.0)
        assert small.missing == 0

    def test_missing_counts_as_zero(self):
        records = [(rec("q1", answers=("a",)), 5.0), (rec("q2", answers=("b",)), 5.0)]
        [b] = fontsize_score({("q1", 8): "a"}, records, targets=(8,))
        assert b.missing == 1
        assert b.accuracy == pytest.approx(0.5)

    def test_no_scorable_records(self):
        with pytest.raises(ValidationError):
            fontsize_score({}, [(rec("q1"), 0.0)], targets=(5,))
