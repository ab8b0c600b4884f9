"""Probability-threshold filtering and exact duplicate removal.

All three threshold comparisons are strict; a record sitting exactly on a
boundary is rejected. Attribution in the summary goes to the first failing
check, in the order text, watermark, unsafe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError
from .ingest import ImageMeta


@dataclass(frozen=True)
class FilterThresholds:
    min_p_text: float = 0.8
    max_p_watermark: float = 0.8
    max_p_unsafe: float = 0.5

    def __post_init__(self):
        for name in ("min_p_text", "max_p_watermark", "max_p_unsafe"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v} outside [0, 1]")


def rejection_reason(meta: ImageMeta, thresholds: FilterThresholds) -> str | None:
    """None if the record passes; otherwise which check failed first."""
    if not meta.p_text > thresholds.min_p_text:
        return "text"
    if not meta.p_watermark < thresholds.max_p_watermark:
        return "watermark"
    if not meta.p_unsafe < thresholds.max_p_unsafe:
        return "unsafe"
    return None


def threshold_filter(
    records: Iterable[ImageMeta], thresholds: FilterThresholds
) -> tuple[list[ImageMeta], dict[str, int]]:
    """Keep records that clear every threshold strictly. Returns the
    survivors in input order and a rejection histogram."""
    kept: list[ImageMeta] = []
    rejected = {"text": 0, "watermark": 0, "unsafe": 0}
    for meta in records:
        reason = rejection_reason(meta, thresholds)
        if reason is None:
            kept.append(meta)
        else:
            rejected[reason] += 1
    return kept, rejected


def dedup(records: Sequence[ImageMeta]) -> tuple[list[ImageMeta], int]:
    """Drop exact duplicates by sha256, keeping the first occurrence.
    Returns survivors in input order and the number dropped."""
    seen: set[str] = set()
    kept: list[ImageMeta] = []
    dropped = 0
    for meta in records:
        if meta.sha256 in seen:
            dropped += 1
        else:
            seen.add(meta.sha256)
            kept.append(meta)
    return kept, dropped


def run_filter(
    records: Sequence[ImageMeta],
    thresholds: FilterThresholds,
    *,
    apply_dedup: bool = True,
) -> tuple[list[ImageMeta], dict]:
    """Thresholds first, then dedup; the summary carries the counts the CLI
    reports."""
    surviving, rejected = threshold_filter(records, thresholds)
    duplicates = 0
    if apply_dedup:
        surviving, duplicates = dedup(surviving)
    summary = {
        "input": len(records),
        "kept": len(surviving),
        "rejected_by": rejected,
        "duplicates": duplicates,
    }
    return surviving, summary
