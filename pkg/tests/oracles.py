"""Independent reference implementations used only by tests.

These are deliberately written in a different style from the package
(full-matrix DP, plain dict loops, brute-force scans) so that agreement
is evidence of correctness rather than shared bugs.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np


def lev_matrix(a: str, b: str) -> int:
    """Full-matrix edit distance."""
    m, n = len(a), len(b)
    d = np.zeros((m + 1, n + 1), dtype=np.int64)
    d[:, 0] = np.arange(m + 1)
    d[0, :] = np.arange(n + 1)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i, j] = min(d[i - 1, j] + 1, d[i, j - 1] + 1, d[i - 1, j - 1] + cost)
    return int(d[m, n])


def anls_ref(pred: str, gt: str, tau: float = 0.5) -> float:
    p = pred.strip().lower()
    g = gt.strip().lower()
    s = 1.0 - lev_matrix(p, g) / max(len(p), len(g))
    return s if s >= tau else 0.0


def norm_ref(s: str) -> str:
    return " ".join(s.lower().split())


def partial_ref(pred: str, gt: str) -> str:
    p = norm_ref(pred)
    g = norm_ref(gt)
    if g in p:
        return "correct"
    L = len(g)
    if len(p) < L:
        candidates = [p]
    else:
        candidates = []
        for i in range(0, len(p) - L + 1):
            candidates.append(p[i : i + L])
    best = 0.0
    for w in candidates:
        best = max(best, 1.0 - lev_matrix(w, g) / max(len(w), L))
    if best >= 0.5 and best < 1.0:
        return "partial"
    return "wrong"


def lcs_ref(a, b) -> int:
    m, n = len(a), len(b)
    d = np.zeros((m + 1, n + 1), dtype=np.int64)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if a[i - 1] == b[j - 1]:
                d[i, j] = d[i - 1, j - 1] + 1
            else:
                d[i, j] = max(d[i - 1, j], d[i, j - 1])
    return int(d[m, n])


def rouge_l_ref(pred: str, refs, beta: float = 1.2) -> float:
    hyp = pred.lower().split()
    scores = [0.0]
    for ref in refs:
        r = ref.lower().split()
        lcs = lcs_ref(hyp, r)
        if lcs == 0 or not hyp or not r:
            scores.append(0.0)
            continue
        prec = lcs / len(hyp)
        rec = lcs / len(r)
        denom = rec + (beta * beta) * prec
        scores.append((1 + beta * beta) * prec * rec / denom if denom else 0.0)
    return max(scores)


def _count_ngrams(words, n_max=4):
    counts = defaultdict(int)
    for n in range(1, n_max + 1):
        for i in range(len(words) - n + 1):
            counts[tuple(words[i : i + n])] += 1
    return counts


def cider_d_ref(batch, n_max=4, sigma=6.0):
    """Classic COCO-caption-style CIDEr-D, df over the batch's own refs."""
    crefs = []
    ctest = []
    for pred, refs in batch:
        crefs.append([_count_ngrams(r.lower().split()) for r in refs])
        ctest.append(_count_ngrams(pred.lower().split()))

    doc_freq = defaultdict(float)
    for refs in crefs:
        for ngram in set(ng for ref in refs for ng in ref.keys()):
            doc_freq[ngram] += 1
    ref_len = np.log(float(len(crefs)))

    def counts2vec(cnts):
        vec = [defaultdict(float) for _ in range(n_max)]
        length = 0
        norm = [0.0] * n_max
        for ngram, term_freq in cnts.items():
            df = np.log(max(1.0, doc_freq[ngram]))
            n = len(ngram) - 1
            vec[n][ngram] = float(term_freq) * (ref_len - df)
            norm[n] += pow(vec[n][ngram], 2)
            if n == 0:
                length += term_freq
        norm = [np.sqrt(v) for v in norm]
        return vec, norm, length

    def sim(vec_hyp, vec_ref, norm_hyp, norm_ref, length_hyp, length_ref):
        delta = float(length_hyp - length_ref)
        val = np.array([0.0] * n_max)
        for n in range(n_max):
            for ngram, count in vec_hyp[n].items():
                val[n] += min(vec_hyp[n][ngram], vec_ref[n][ngram]) * vec_ref[n][ngram]
            if (norm_hyp[n] != 0) and (norm_ref[n] != 0):
                val[n] /= norm_hyp[n] * norm_ref[n]
            val[n] *= np.e ** (-(delta**2) / (2 * sigma**2))
        return val

    scores = []
    for test, refs in zip(ctest, crefs):
        vec, norm, length = counts2vec(test)
        score = np.array([0.0] * n_max)
        for ref in refs:
            vec_ref, norm_ref_, length_ref = counts2vec(ref)
            score += sim(vec, vec_ref, norm, norm_ref_, length, length_ref)
        score_avg = np.mean(score)
        score_avg /= len(refs)
        score_avg *= 10.0
        scores.append(float(score_avg))
    return scores, float(np.mean(scores)) if scores else 0.0


def meteor_lite_ref(pred: str, ref: str) -> float:
    hyp = pred.lower().split()
    rtok = ref.lower().split()
    if not hyp or not rtok:
        return 0.0
    taken = set()
    align = {}
    for i, w in enumerate(hyp):
        for j, r in enumerate(rtok):
            if j not in taken and r == w:
                taken.add(j)
                align[i] = j
                break
    m = len(align)
    if m == 0:
        return 0.0
    p = m / len(hyp)
    r = m / len(rtok)
    f = 10 * p * r / (r + 9 * p)
    hs = sorted(align)
    chunks = 1
    for prev, cur in zip(hs, hs[1:]):
        if not (cur == prev + 1 and align[cur] == align[prev] + 1):
            chunks += 1
    return f * (1 - 0.5 * (chunks / m) ** 3)


def lloyd_ref(x: np.ndarray, k: int, seed: int, restarts: int = 100, iters: int = 300):
    """Brute-force Lloyd with random-point init and many restarts; returns
    the best labeling by inertia."""
    rng = np.random.default_rng(seed)
    best_labels = None
    best_inertia = np.inf
    n = x.shape[0]
    for _ in range(restarts):
        centroids = x[rng.choice(n, size=k, replace=False)].astype(np.float64).copy()
        for _ in range(iters):
            d = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            labels = d.argmin(axis=1)
            new = centroids.copy()
            for c in range(k):
                pts = x[labels == c]
                if len(pts):
                    new[c] = pts.mean(axis=0)
            if np.allclose(new, centroids):
                break
            centroids = new
        d = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d.argmin(axis=1)
        inertia = float(d[np.arange(n), labels].sum())
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels, best_inertia


def assign_ref(centroids: np.ndarray, x: np.ndarray):
    """Brute-force nearest centroid per row."""
    out = []
    for row in x:
        best_c = 0
        best_d = np.inf
        for c, cent in enumerate(centroids):
            d = float(((row - cent) ** 2).sum())
            if d < best_d - 1e-15:
                best_d = d
                best_c = c
        out.append((best_c, math.sqrt(best_d)))
    return out
