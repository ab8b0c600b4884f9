"""Font-size sensitivity study: plan image rescales that pin the answer
text to target pixel heights, then score accuracy per target height."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..errors import ValidationError
from . import metrics
from .records import EvalRecord

DEFAULT_TARGETS = tuple(range(3, 20))  # 3..19 px inclusive


@dataclass(frozen=True)
class RescaleJob:
    qid: str
    image_id: str
    target_height_px: int
    scale: float


@dataclass(frozen=True)
class FontSizeBin:
    target_height_px: int
    n: int
    accuracy: float
    missing: int = 0


def fontsize_plan(
    records: Sequence[tuple[EvalRecord, float]],
    targets: Sequence[int] = DEFAULT_TARGETS,
) -> tuple[list[RescaleJob], int]:
    """One job per (record, target): scale = target / answer height.

    Records whose measured answer height is not positive cannot be
    rescaled meaningfully; they are skipped and counted. Jobs come back
    grouped by record in input order, targets ascending within."""
    if not targets:
        raise ValidationError("no target heights")
    if any(t < 1 for t in targets):
        raise ValidationError("target heights must be >= 1 px")
    jobs: list[RescaleJob] = []
    skipped = 0
    ordered = sorted(targets)
    for rec, height in records:
        if height <= 0:
            skipped += 1
            continue
        for t in ordered:
            jobs.append(
                RescaleJob(
                    qid=rec.qid,
                    image_id=rec.image_id,
                    target_height_px=int(t),
                    scale=t / height,
                )
            )
    return jobs, skipped


def fontsize_score(
    predictions: Mapping[tuple[str, int], str],
    records: Sequence[tuple[EvalRecord, float]],
    targets: Sequence[int] = DEFAULT_TARGETS,
) -> list[FontSizeBin]:
    """Containment accuracy per target height.

    predictions is keyed by (qid, target_height_px). A scheduled record
    with no prediction counts as missing and scores 0 at that height."""
    scheduled = [rec for rec, h in records if h > 0]
    if not scheduled:
        raise ValidationError("no scorable records")
    bins = []
    for t in sorted(targets):
        hits = 0
        missing = 0
        for rec in scheduled:
            pred = predictions.get((rec.qid, int(t)))
            if pred is None:
                missing += 1
                continue
            hits += metrics.contains_accuracy(pred, rec.gt_answers)
        bins.append(
            FontSizeBin(
                target_height_px=int(t),
                n=len(scheduled),
                accuracy=hits / len(scheduled),
                missing=missing,
            )
        )
    return bins
