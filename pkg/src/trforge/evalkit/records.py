"""Evaluation records: one normalized schema for every VQA source.

Adapters map each dataset's native JSON into EvalRecord rows; predictions
merge in by question id. The report builder computes every text metric
this package knows about, per record and aggregated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from ..artifacts import write_jsonl
from ..errors import ValidationError
from . import metrics


@dataclass(frozen=True)
class EvalRecord:
    qid: str
    image_id: str
    question: str
    gt_answers: tuple[str, ...]
    prediction: str = ""

    def __post_init__(self):
        if not self.qid:
            raise ValidationError("record with empty qid")
        if not self.gt_answers:
            raise ValidationError(f"record {self.qid!r} has no ground-truth answers")
        if any(not a for a in self.gt_answers):
            raise ValidationError(f"record {self.qid!r} has an empty ground-truth answer")


def record_to_json(rec: EvalRecord) -> dict:
    return {
        "qid": rec.qid,
        "image_id": rec.image_id,
        "question": rec.question,
        "gt_answers": list(rec.gt_answers),
        "prediction": rec.prediction,
    }


def record_from_json(obj: dict) -> EvalRecord:
    try:
        return EvalRecord(
            qid=str(obj["qid"]),
            image_id=str(obj.get("image_id", "")),
            question=str(obj.get("question", "")),
            gt_answers=tuple(str(a) for a in obj["gt_answers"]),
            prediction=str(obj.get("prediction", "")),
        )
    except KeyError as e:
        raise ValidationError(f"record missing {e}") from e


def read_records(path: str | Path) -> list[EvalRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(record_from_json(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                raise ValidationError(f"line {lineno}: {e}") from e
    qids = [r.qid for r in out]
    if len(set(qids)) != len(qids):
        dupe = next(q for q in qids if qids.count(q) > 1)
        raise ValidationError(f"duplicate qid {dupe!r}")
    return out


def write_records(records: Sequence[EvalRecord], path: str | Path) -> int:
    return write_jsonl(path, (record_to_json(r) for r in records))


def merge_predictions(
    records: Sequence[EvalRecord], predictions: Mapping[str, str]
) -> tuple[list[EvalRecord], list[str]]:
    """Attach predictions by qid; returns the merged rows and the qids
    that had no prediction (their prediction stays empty)."""
    missing = []
    out = []
    for rec in records:
        if rec.qid in predictions:
            out.append(replace(rec, prediction=predictions[rec.qid]))
        else:
            missing.append(rec.qid)
            out.append(rec)
    return out, missing


# --- native dataset adapters -------------------------------------------------

def from_stvqa(doc: dict) -> list[EvalRecord]:
    """ST-VQA task json: {"data": [{question_id, question, answers, file_path}]}"""
    try:
        rows = doc["data"]
    except KeyError as e:
        raise ValidationError(f"ST-VQA json missing {e}") from e
    return [
        EvalRecord(
            qid=str(r["question_id"]),
            image_id=str(r.get("file_path", r.get("file_name", ""))),
            question=r["question"],
            gt_answers=tuple(r["answers"]),
        )
        for r in rows
    ]


def from_textvqa(doc: dict) -> list[EvalRecord]:
    """TextVQA json: {"data": [{question_id, question, answers, image_id}]}"""
    try:
        rows = doc["data"]
    except KeyError as e:
        raise ValidationError(f"TextVQA json missing {e}") from e
    return [
        EvalRecord(
            qid=str(r["question_id"]),
            image_id=str(r["image_id"]),
            question=r["question"],
            gt_answers=tuple(r["answers"]),
        )
        for r in rows
    ]


def from_ocrvqa(doc: dict) -> list[EvalRecord]:
    """OCR-VQA json: {image_id: {questions: [...], answers: [...], ...}}.
    Questions and answers pair positionally; qid is image_id:index."""
    out = []
    for image_id, entry in doc.items():
        qs, ans = entry["questions"], entry["answers"]
        if len(qs) != len(ans):
            raise ValidationError(
                f"{image_id}: {len(qs)} questions vs {len(ans)} answers"
            )
        for i, (q, a) in enumerate(zip(qs, ans)):
            out.append(
                EvalRecord(
                    qid=f"{image_id}:{i}",
                    image_id=str(image_id),
                    question=q,
                    gt_answers=(a,),
                )
            )
    return out


def from_docvqa(doc: dict) -> list[EvalRecord]:
    """DocVQA json: {"data": [{questionId, question, answers, image}]}"""
    try:
        rows = doc["data"]
    except KeyError as e:
        raise ValidationError(f"DocVQA json missing {e}") from e
    return [
        EvalRecord(
            qid=str(r["questionId"]),
            image_id=str(r.get("image", "")),
            question=r["question"],
            gt_answers=tuple(r["answers"]),
        )
        for r in rows
    ]


ADAPTERS = {
    "stvqa": from_stvqa,
    "textvqa": from_textvqa,
    "ocrvqa": from_ocrvqa,
    "docvqa": from_docvqa,
}


# --- report ------------------------------------------------------------------

def compute_report(records: Sequence[EvalRecord], *, tau: float = 0.5) -> dict:
    """Per-record and aggregate metrics over predicted records.

    CIDEr-D is corpus-level (IDF over the batch's reference sets) and is
    reported as null when the batch is too small for IDF.
    """
    if not records:
        raise ValidationError("no records to score")

    per_record = []
    classes = []
    for rec in records:
        acc = metrics.contains_accuracy(rec.prediction, rec.gt_answers)
        a = metrics.anls_best(rec.prediction, rec.gt_answers, tau)
        cls = metrics.partial_correct_best(rec.prediction, rec.gt_answers)
        classes.append(cls)
        per_record.append(
            {
                "qid": rec.qid,
                "accuracy": acc,
                "anls": a,
                "partial_class": cls,
                "rouge_l": metrics.rouge_l(rec.prediction, rec.gt_answers),
                "meteor_lite": metrics.meteor_lite_best(rec.prediction, rec.gt_answers),
            }
        )

    cider_scores: list[float] | None
    try:
        cider_scores, cider_mean = metrics.cider_d(
            [(r.prediction, list(r.gt_answers)) for r in records]
        )
    except ValidationError:
        cider_scores, cider_mean = None, None
    if cider_scores is not None:
        for row, s in zip(per_record, cider_scores):
            row["cider_d"] = s

    n = len(records)
    aggregate = {
        "n": n,
        "accuracy": sum(r["accuracy"] for r in per_record) / n,
        "anls": sum(r["anls"] for r in per_record) / n,
        "correct_pct": 100.0 * classes.count("correct") / n,
        "partial_pct": 100.0 * classes.count("partial") / n,
        "rouge_l": sum(r["rouge_l"] for r in per_record) / n,
        "meteor_lite": sum(r["meteor_lite"] for r in per_record) / n,
        "cider_d": cider_mean,
    }
    return {"per_record": per_record, "aggregate": aggregate}
