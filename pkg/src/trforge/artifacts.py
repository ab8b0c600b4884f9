"""Atomic file writes, input hashing, and run manifests.

Every CLI stage writes artifacts through these helpers so that a crash
mid-write never leaves a truncated artifact behind, and so that two runs
with identical inputs and seeds produce byte-identical manifests (the
manifest deliberately records no wall-clock time).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from . import __version__


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write to a sibling temp file, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> int:
    """Serialize rows one JSON object per line; returns the row count."""
    lines = []
    for row in rows:
        lines.append(json.dumps(row, ensure_ascii=False, separators=(",", ":")))
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return len(lines)


def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def manifest_path(artifact: str | Path) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + ".manifest.json")


def write_manifest(
    artifact: str | Path,
    *,
    subcommand: str,
    params: dict,
    seeds: dict,
    inputs: Iterable[str | Path],
    counts: dict,
) -> Path:
    """Record what produced `artifact`: tool version, parameters, seeds,
    sha256 of every input file, and output counts. Deterministic bytes."""
    entries = [
        {"path": str(p), "sha256": file_sha256(p)}
        for p in sorted(Path(p) for p in inputs)
    ]
    doc = {
        "tool": "trforge",
        "version": __version__,
        "subcommand": subcommand,
        "artifact": Path(artifact).name,
        "params": params,
        "seeds": seeds,
        "inputs": entries,
        "counts": counts,
    }
    out = manifest_path(artifact)
    atomic_write_text(out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return out
