"""Job execution.

Each operation reads one manifest, drives its backend, and writes
complete output files plus a deterministic report (sorted keys, no
timestamps) describing what was produced and what was skipped. Per-item
failures that the job contract tolerates (unreadable image, engine
crash) never abort the run; they are logged, tagged, and counted.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np

from . import trfg
from .atomicio import atomic_write_json, atomic_write_jsonl
from .backends import (
    resolve_captioner,
    resolve_classifier,
    resolve_embedder,
    resolve_ocr,
)
from .errors import InpaintUnavailable, JobError
from .imaging import inpaint_telea, load_image, quad_mask, resize_bilinear, save_image
from .jobs import ExtractJob, read_manifest

log = logging.getLogger("extract_sidecar")

_SAFE_ID = re.compile(r"[A-Za-z0-9._-]+")


def report_path(out: str | Path) -> Path:
    out = Path(out)
    return out.parent / (out.name + ".report.json")


def _chunks(seq: list, size: int) -> list[list]:
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def _check_file_id(rid: str) -> str:
    if not _SAFE_ID.fullmatch(rid):
        raise JobError(f"id {rid!r} is not filename-safe")
    return rid


def _load_or_skip(job: ExtractJob, row: dict, key: str, skipped: list[str]):
    """Decode one manifest image; on failure record the id and move on."""
    path = job.resolve_input(row["path"])
    try:
        return load_image(path)
    except (OSError, ValueError) as e:
        log.warning("skipping %s: unreadable image %s (%s)", row[key], path, e)
        skipped.append(row[key])
        return None


def _embed(job: ExtractJob, *, images: bool) -> dict:
    if images:
        rows = read_manifest(job.manifest, ("image_id", "path"))
        embedder = resolve_embedder(job.backend, job.model, job.dim, "image")
    else:
        rows = read_manifest(job.manifest, ("text_id", "text"))
        embedder = resolve_embedder(job.backend, job.model, job.dim, "text")

    ids: list[str] = []
    skipped: list[str] = []
    inputs = []
    for row in rows:
        if images:
            rgb = _load_or_skip(job, row, "image_id", skipped)
            if rgb is None:
                continue
            inputs.append(rgb)
            ids.append(row["image_id"])
        else:
            if not isinstance(row["text"], str):
                raise JobError(f"text for {row['text_id']!r} is not a string")
            inputs.append(row["text"])
            ids.append(row["text_id"])

    parts = []
    for chunk in _chunks(inputs, job.batch_size):
        parts.append(embedder.embed_images(chunk) if images else embedder.embed_texts(chunk))
    if parts:
        matrix = np.vstack(parts).astype(np.float32)
        dim = int(matrix.shape[1])
    else:
        # nothing embeddable: still a valid, parseable zero-row file
        dim = int(getattr(embedder, "dim", job.dim))
        matrix = np.zeros((0, dim), dtype=np.float32)

    trfg.write_matrix(job.out, ids, matrix)
    report = {
        "kind": job.kind,
        "backend": embedder.model_id,
        "model": job.model,
        "batch_size": job.batch_size,
        "dim": dim,
        "count": len(ids),
        "skipped": skipped,
    }
    atomic_write_json(report_path(job.out), report)
    return report


def _check_quads(image_id: str, quads) -> list[list[list[float]]]:
    if not isinstance(quads, list):
        raise JobError(f"quads for {image_id!r} must be a list")
    out = []
    for q in quads:
        if not isinstance(q, list) or len(q) != 4:
            raise JobError(f"quad for {image_id!r} needs 4 points")
        pts = []
        for p in q:
            if not isinstance(p, (list, tuple)) or len(p) < 2:
                raise JobError(f"quad point for {image_id!r} needs x and y")
            pts.append([float(p[0]), float(p[1])])
        out.append(pts)
    return out


def _caption_masked(job: ExtractJob) -> dict:
    rows = read_manifest(job.manifest, ("image_id", "path", "quads"))
    captioner = resolve_captioner(job.backend, job.model)

    out_rows = []
    skipped: list[str] = []
    for row in rows:
        rgb = _load_or_skip(job, row, "image_id", skipped)
        if rgb is None:
            continue
        quads = _check_quads(row["image_id"], row["quads"])
        h, w = rgb.shape[:2]
        flags: list[str] = []
        if quads:
            mask = quad_mask(w, h, quads, job.dilation_px)
            coverage = float(mask.mean())
        else:
            mask = np.zeros((h, w), dtype=bool)
            coverage = 0.0

        target = rgb
        if mask.any():
            try:
                target = inpaint_telea(rgb, mask)
            except InpaintUnavailable as e:
                # caption the original, unmasked image rather than dropping the row
                log.warning("%s: %s; captioning without text removal", row["image_id"], e)
                flags.append("inpaint_failed")
        if coverage >= 1.0:
            # nothing but inpainted pixels left to describe
            flags.append("low_confidence")

        out_rows.append(
            {
                "image_id": row["image_id"],
                "caption": captioner.caption(target),
                "coverage": coverage,
                "model": captioner.model_id,
                "flags": sorted(flags),
            }
        )

    atomic_write_jsonl(job.out, out_rows)
    report = {
        "kind": job.kind,
        "backend": captioner.model_id,
        "model": job.model,
        "dilation_px": job.dilation_px,
        "count": len(out_rows),
        "skipped": skipped,
    }
    atomic_write_json(report_path(job.out), report)
    return report


def _classify_text(job: ExtractJob) -> dict:
    rows = read_manifest(job.manifest, ("image_id", "path"))
    classifier = resolve_classifier(job.backend)

    out_rows = []
    skipped: list[str] = []
    for row in rows:
        rgb = _load_or_skip(job, row, "image_id", skipped)
        if rgb is None:
            continue
        out_rows.append({"image_id": row["image_id"], "p_text": classifier.p_text(rgb)})

    atomic_write_jsonl(job.out, out_rows)
    report = {
        "kind": job.kind,
        "backend": classifier.model_id,
        "model": job.model,
        "count": len(out_rows),
        "skipped": skipped,
    }
    atomic_write_json(report_path(job.out), report)
    return report


def _run_ocr(job: ExtractJob) -> dict:
    rows = read_manifest(job.manifest, ("image_id", "path"))
    recognizer = resolve_ocr(job.backend)
    outdir = Path(job.out)
    outdir.mkdir(parents=True, exist_ok=True)

    errors: dict[str, str] = {}
    for row in rows:
        image_id = _check_file_id(row["image_id"])
        wrapper = {
            "image_id": image_id,
            "engine": job.engine,
            "width_px": 1,
            "height_px": 1,
            "result": [],
        }
        path = job.resolve_input(row["path"])
        try:
            rgb = load_image(path)
        except (OSError, ValueError) as e:
            errors[image_id] = f"unreadable image: {e}"
            wrapper["error"] = errors[image_id]
            atomic_write_json(outdir / f"{image_id}.json", wrapper)
            continue

        h, w = rgb.shape[:2]
        wrapper["width_px"] = w
        wrapper["height_px"] = h
        try:
            words = recognizer.recognize(rgb)
        except Exception as e:  # engine internals are arbitrary; isolate per image
            errors[image_id] = f"engine failure: {e}"
            wrapper["error"] = errors[image_id]
            atomic_write_json(outdir / f"{image_id}.json", wrapper)
            continue

        if job.engine == "paddle":
            wrapper["result"] = [[quad, [text, conf]] for quad, text, conf in words]
        else:
            wrapper["result"] = [[quad, text, conf] for quad, text, conf in words]
        atomic_write_json(outdir / f"{image_id}.json", wrapper)

    report = {
        "kind": job.kind,
        "backend": recognizer.model_id,
        "model": job.model,
        "engine": job.engine,
        "count": len(rows),
        "errors": errors,
    }
    atomic_write_json(report_path(job.out), report)
    return report


def _resize(job: ExtractJob) -> dict:
    rows = read_manifest(job.manifest, ("out_id", "path", "scale"))
    outdir = Path(job.out)
    outdir.mkdir(parents=True, exist_ok=True)

    items = []
    skipped: list[str] = []
    for row in rows:
        out_id = _check_file_id(row["out_id"])
        scale = row["scale"]
        if not isinstance(scale, (int, float)) or isinstance(scale, bool) or scale <= 0:
            raise JobError(f"scale for {out_id!r} must be a positive number, got {scale!r}")
        rgb = _load_or_skip(job, row, "out_id", skipped)
        if rgb is None:
            continue
        resized = resize_bilinear(rgb, float(scale))
        name = f"{out_id}.png"
        save_image(outdir / name, resized)
        item = {
            "out_id": out_id,
            "path": name,
            "scale": float(scale),
            "interpolation": "bilinear",
            "width_px": int(resized.shape[1]),
            "height_px": int(resized.shape[0]),
        }
        for extra in ("image_id", "qid", "target_height_px"):
            if extra in row:
                item[extra] = row[extra]
        items.append(item)

    report = {
        "kind": job.kind,
        "interpolation": "bilinear",
        "count": len(items),
        "skipped": skipped,
        "items": items,
    }
    atomic_write_json(report_path(job.out), report)
    return report


_RUNNERS = {
    "embed_images": lambda job: _embed(job, images=True),
    "embed_texts": lambda job: _embed(job, images=False),
    "caption_masked": _caption_masked,
    "classify_text": _classify_text,
    "run_ocr": _run_ocr,
    "resize": _resize,
}


def run_job(job: ExtractJob) -> dict:
    """Execute one job and return its report (also written next to the output)."""
    return _RUNNERS[job.kind](job)
