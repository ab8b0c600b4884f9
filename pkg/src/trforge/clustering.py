"""K-means clustering over embedding rows, plus the bookkeeping around it:
sampling ids for the fit, capping cluster sizes, serializing models, and
exporting a static HTML gallery for manual cluster inspection.

Lloyd's algorithm is written out here instead of delegated to a library
because downstream checks depend on details libraries do not pin down:
the inertia trace must be non-increasing, ties in nearest-centroid always
go to the lowest index, and an emptied cluster is reseeded to the point
farthest from its assigned centroid.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .artifacts import atomic_write_bytes, atomic_write_text
from .errors import FormatError, ValidationError
from .ingest import EmbeddingMatrix, decode_embeddings, encode_embeddings

# rng namespacing so distinct stages never share a stream even on equal seeds
_SAMPLE_SALT = 101
_FIT_SALT = 102
_CAP_SALT = 103
_GALLERY_SALT = 104


@dataclass
class ClusterModel:
    centroids: np.ndarray
    seed: int
    iterations_run: int
    inertia: float
    inertia_trace: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])


@dataclass(frozen=True)
class ClusterKeepList:
    keep: tuple[int, ...]
    cap_per_cluster: int = 52000

    def __post_init__(self):
        if len(set(self.keep)) != len(self.keep):
            raise ValidationError("keep list has duplicate cluster indices")
        if any(c < 0 for c in self.keep):
            raise ValidationError("keep list has negative cluster indices")
        if self.cap_per_cluster < 1:
            raise ValidationError(f"cap_per_cluster={self.cap_per_cluster} must be >= 1")


def sample_ids(ids: Sequence[str], n: int, seed: int) -> list[str]:
    """Uniform sample without replacement, returned in input order."""
    if n > len(ids):
        raise ValidationError(f"cannot sample {n} from {len(ids)} ids")
    rng = np.random.default_rng([_SAMPLE_SALT, seed])
    chosen = rng.choice(len(ids), size=n, replace=False)
    chosen.sort()
    return [ids[int(i)] for i in chosen]


def _pairwise_sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared Euclidean distances; clip tiny negatives from the
    # expansion trick so inertia stays monotone under float noise
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centroids.T)
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=x.dtype)
    first = int(rng.integers(n))
    centroids[0] = x[first]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[j] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centroids[j]) ** 2, axis=1))
    return centroids


def kmeans_fit(
    m: EmbeddingMatrix,
    k: int,
    seed: int,
    *,
    max_iter: int = 100,
    tol: float = 1e-4,
) -> ClusterModel:
    """Lloyd's algorithm with k-means++ seeding, fully deterministic for a
    given seed. Stops when the largest centroid displacement drops below
    tol or after max_iter update rounds."""
    x = np.asarray(m.data, dtype=np.float64)
    n = x.shape[0]
    if n < k:
        raise ValidationError(f"{n} rows cannot support k={k}")
    if not np.isfinite(x).all():
        raise ValidationError("embedding rows contain NaN or inf")

    rng = np.random.default_rng([_FIT_SALT, seed])
    centroids = _kmeans_pp_init(x, k, rng)
    trace: list[float] = []
    iterations = 0

    for _ in range(max_iter):
        d2 = _pairwise_sq_dists(x, centroids)
        labels = np.argmin(d2, axis=1)  # argmin takes the lowest index on ties
        trace.append(float(d2[np.arange(n), labels].sum()))
        iterations += 1

        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = x[members].mean(axis=0)
        # reseed emptied clusters to the point farthest from its centroid;
        # ties go to the lowest row index (argmax semantics)
        empty = [c for c in range(k) if not (labels == c).any()]
        if empty:
            assigned_d2 = d2[np.arange(n), labels].copy()
            for c in empty:
                far = int(np.argmax(assigned_d2))
                new_centroids[c] = x[far]
                assigned_d2[far] = -1.0  # do not pick the same point twice

        shift = float(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1)).max())
        centroids = new_centroids
        if shift < tol:
            break

    d2 = _pairwise_sq_dists(x, centroids)
    labels = np.argmin(d2, axis=1)
    final_inertia = float(d2[np.arange(n), labels].sum())
    trace.append(final_inertia)

    return ClusterModel(
        centroids=centroids,
        seed=seed,
        iterations_run=iterations,
        inertia=final_inertia,
        inertia_trace=trace,
    )


def assign(model: ClusterModel, m: EmbeddingMatrix) -> list[tuple[str, int, float]]:
    """Nearest centroid for every row: (id, cluster, Euclidean distance).
    Ties go to the lowest cluster index."""
    if m.dim != model.dim:
        raise ValidationError(f"embedding dim {m.dim} != model dim {model.dim}")
    x = np.asarray(m.data, dtype=np.float64)
    d2 = _pairwise_sq_dists(x, np.asarray(model.centroids, dtype=np.float64))
    labels = np.argmin(d2, axis=1)
    dists = np.sqrt(d2[np.arange(x.shape[0]), labels])
    return [
        (m.ids[i], int(labels[i]), float(dists[i]))
        for i in range(x.shape[0])
    ]


def cap_per_cluster(
    assignments: Sequence[tuple[str, int, float]],
    keeplist: ClusterKeepList,
    seed: int,
) -> list[str]:
    """Restrict to kept clusters and uniformly subsample any cluster above
    the cap. Survivors come back in input order; each cluster draws from
    its own seeded stream so results do not depend on other clusters."""
    keep = set(keeplist.keep)
    members: dict[int, list[int]] = {c: [] for c in keeplist.keep}
    for pos, row in enumerate(assignments):
        cluster = int(row[1])
        if cluster in keep:
            members[cluster].append(pos)

    chosen: list[int] = []
    for cluster in keeplist.keep:
        pool = members[cluster]
        if len(pool) <= keeplist.cap_per_cluster:
            chosen.extend(pool)
        else:
            rng = np.random.default_rng([_CAP_SALT, seed, cluster])
            picked = rng.choice(len(pool), size=keeplist.cap_per_cluster, replace=False)
            chosen.extend(pool[int(i)] for i in picked)

    chosen.sort()
    return [assignments[i][0] for i in chosen]


def save_model(model: ClusterModel, path: str | Path) -> None:
    """One JSON header line, then the centroid matrix in the embedding
    binary format."""
    header = {
        "k": model.k,
        "dim": model.dim,
        "seed": model.seed,
        "iterations_run": model.iterations_run,
        "inertia": model.inertia,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    blob += encode_embeddings(np.asarray(model.centroids, dtype=np.float32))
    atomic_write_bytes(path, blob)


def load_model(path: str | Path) -> ClusterModel:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise FormatError("cluster model missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"bad cluster model header: {e}") from e
    centroids = decode_embeddings(raw[nl + 1 :])
    if centroids.shape != (header["k"], header["dim"]):
        raise FormatError(
            f"centroid payload {centroids.shape} does not match header "
            f"({header['k']}, {header['dim']})"
        )
    return ClusterModel(
        centroids=centroids.astype(np.float64),
        seed=int(header["seed"]),
        iterations_run=int(header["iterations_run"]),
        inertia=float(header["inertia"]),
    )


def save_keeplist(keeplist: ClusterKeepList, path: str | Path) -> None:
    doc = {"keep": list(keeplist.keep), "cap_per_cluster": keeplist.cap_per_cluster}
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_keeplist(path: str | Path) -> ClusterKeepList:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return ClusterKeepList(
            keep=tuple(int(c) for c in doc["keep"]),
            cap_per_cluster=int(doc.get("cap_per_cluster", 52000)),
        )
    except (KeyError, TypeError) as e:
        raise FormatError(f"bad keep-list file: {e}") from e


def export_gallery(
    assignments: Sequence[tuple[str, int, float]],
    image_dir: str | Path,
    out_dir: str | Path,
    *,
    per_cluster: int = 10,
    seed: int = 0,
) -> Path:
    """Static HTML pages (one per cluster plus an index) showing sampled
    members, to support picking the clusters worth keeping. Missing image
    files render as a grey placeholder rather than failing the export.
    Also writes keeplist_skeleton.json listing every cluster unkept."""
    image_dir = Path(image_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    by_cluster: dict[int, list[str]] = {}
    for image_id, cluster, _ in assignments:
        by_cluster.setdefault(int(cluster), []).append(image_id)

    index_rows = []
    for cluster in sorted(by_cluster):
        ids = by_cluster[cluster]
        if len(ids) > per_cluster:
            rng = np.random.default_rng([_GALLERY_SALT, seed, cluster])
            picked = sorted(rng.choice(len(ids), size=per_cluster, replace=False))
            shown = [ids[int(i)] for i in picked]
        else:
            shown = list(ids)

        cells = []
        for image_id in shown:
            img = _find_image(image_dir, image_id)
            if img is None:
                cells.append(
                    f'<figure><div class="missing"></div>'
                    f"<figcaption>{html.escape(image_id)} (missing)</figcaption></figure>"
                )
            else:
                cells.append(
                    f'<figure><img src="{html.escape(str(img))}" loading="lazy">'
                    f"<figcaption>{html.escape(image_id)}</figcaption></figure>"
                )
        page = _PAGE_TMPL.format(
            title=f"cluster {cluster}", count=len(ids), cells="\n".join(cells)
        )
        atomic_write_text(out_dir / f"cluster_{cluster:03d}.html", page)
        index_rows.append(
            f'<li><a href="cluster_{cluster:03d}.html">cluster {cluster}</a>'
            f" ({len(ids)} members)</li>"
        )

    index = _INDEX_TMPL.format(rows="\n".join(index_rows))
    atomic_write_text(out_dir / "index.html", index)
    skeleton = {"keep": [], "cap_per_cluster": 52000,
                "all_clusters": sorted(by_cluster)}
    atomic_write_text(
        out_dir / "keeplist_skeleton.json",
        json.dumps(skeleton, sort_keys=True, indent=2) + "\n",
    )
    return out_dir / "index.html"


def _find_image(image_dir: Path, image_id: str) -> Path | None:
    for ext in (".jpg", ".jpeg", ".png", ".webp"):
        candidate = image_dir / (image_id + ext)
        if candidate.exists():
            return candidate
    return None


_PAGE_TMPL = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>{title}</title>
<style>
body {{ font-family: sans-serif; margin: 1rem; }}
figure {{ display: inline-block; margin: 4px; text-align: center; }}
img, .missing {{ width: 160px; height: 160px; object-fit: contain; background: #eee; }}
.missing {{ display: inline-block; }}
figcaption {{ font-size: 11px; max-width: 160px; overflow-wrap: anywhere; }}
</style></head>
<body><h1>{title}</h1><p>{count} members</p>
{cells}
</body></html>
"""

_INDEX_TMPL = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>cluster gallery</title></head>
<body><h1>Clusters</h1><ul>
{rows}
</ul></body></html>
"""
