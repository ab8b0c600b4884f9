"""Text metrics for VQA-style evaluation.

Two normalization regimes on purpose: containment checks (and the
partial-correctness window scan built on them) lowercase and collapse
whitespace, while ANLS only lowercases and trims, following the

conventions of the benchmarks these mirror. meteor_lite is a simplified
METEOR (exact unigram matches only, no stemming or synonymy) and is
labeled as such everywhere it is reported.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Sequence

from ..errors import ValidationError


def normalize_text(s: str) -> str:
    """Lowercase and collapse all whitespace runs to single spaces."""
    return " ".join(s.lower().split())


def contains_accuracy(prediction: str, gt_answers: Sequence[str]) -> int:
    """1 when any normalized ground-truth answer is a substring of the
    normalized prediction."""
    if not gt_answers:
        raise ValidationError("no ground-truth answers")
    pred = normalize_text(prediction)
    for gt in gt_answers:
        g = normalize_text(gt)
        if not g:
            raise ValidationError("empty ground-truth answer")
        if g in pred:
            return 1
    return 0


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit costs, two-row DP."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def anls(prediction: str, gt: str, tau: float = 0.5) -> float:
    """Normalized Levenshtein similarity, zeroed below tau."""
    g = gt.strip().lower()
    if not g:
        raise ValidationError("empty ground-truth answer")
    p = prediction.strip().lower()
    denom = max(len(p), len(g))
    score = 1.0 - levenshtein(p, g) / denom
    return score if score >= tau else 0.0


def anls_best(prediction: str, gt_answers: Sequence[str], tau: float = 0.5) -> float:
    if not gt_answers:
        raise ValidationError("no ground-truth answers")
    return max(anls(prediction, gt, tau) for gt in gt_answers)


def partial_correct(prediction: str, gt: str) -> str:
    """Classify a prediction as "correct", "partial", or "wrong".

    Containment (after containment normalization) is correct. Otherwise
    every window of the prediction with the ground truth's length is
    scored by normalized Levenshtein similarity; a best score in
    [0.5, 1) is partial. Predictions shorter than the ground truth are
    scored as a single window.
    """
    g = normalize_text(gt)
    if not g:
        raise ValidationError("empty ground-truth answer")
    p = normalize_text(prediction)
    if g in p:
        return "correct"
    length = len(g)
    if len(p) < length:
        windows = [p]
    else:
        windows = [p[i : i + length] for i in range(len(p) - length + 1)]
    best = 0.0
    for w in windows:
        denom = max(len(w), length)
        best = max(best, 1.0 - levenshtein(w, g) / denom)
    return "partial" if 0.5 <= best < 1.0 else "wrong"


def partial_correct_best(prediction: str, gt_answers: Sequence[str]) -> str:
    """Best class over the answers (correct beats partial beats wrong)."""
    if not gt_answers:
        raise ValidationError("no ground-truth answers")
    rank = {"wrong": 0, "partial": 1, "correct": 2}
    best = "wrong"
    for gt in gt_answers:
        c = partial_correct(prediction, gt)
        if rank[c] > rank[best]:
            best = c
    return best


def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[len(b)]


def rouge_l(prediction: str, references: Sequence[str], beta: float = 1.2) -> float:
    """LCS F-measure, maximum over references."""
    if not references:
        raise ValidationError("no references")
    hyp = prediction.lower().split()
    best = 0.0
    for ref in references:
        r_tokens = ref.lower().split()
        lcs = _lcs_len(hyp, r_tokens)
        if lcs == 0:
            continue
        prec = lcs / len(hyp)
        rec = lcs / len(r_tokens)
        f = ((1.0 + beta**2) * prec * rec) / (rec + beta**2 * prec)
        best = max(best, f)
    return best


def _ngrams(tokens: Sequence[str], n_max: int) -> dict[int, Counter]:
    out = {}
    for n in range(1, n_max + 1):
        out[n] = Counter(
            tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
        )
    return out


def cider_d(
    batch: Sequence[tuple[str, Sequence[str]]],
    corpus_refs: Sequence[Sequence[str]] | None = None,
    *,
    n_max: int = 4,
    sigma: float = 6.0,
) -> tuple[list[float], float]:
    """CIDEr-D over a batch of (prediction, references).

    TF-IDF n-gram vectors (n = 1..4) with document frequencies taken over
    the reference sets (the batch's own by default, or corpus_refs), a
    clipped cosine per n, and a Gaussian penalty on the token-length
    difference. Per-item scores average over n and references and are
    scaled by 10. IDF needs at least two reference documents.
    """
    corpus = corpus_refs if corpus_refs is not None else [refs for _, refs in batch]
    if len(corpus) < 2:
        raise ValidationError(f"CIDEr IDF needs >= 2 reference sets, got {len(corpus)}")

    df: Counter = Counter()
    for refs in corpus:
        seen: set = set()
        for ref in refs:
            tokens = ref.lower().split()
            for n, counts in _ngrams(tokens, n_max).items():
                seen.update(counts.keys())
        df.update(seen)
    log_docs = math.log(len(corpus))

    def tfidf_vec(tokens: Sequence[str]) -> tuple[dict[int, dict], list[float], int]:
        counts = _ngrams(tokens, n_max)
        vec: dict[int, dict] = {n: {} for n in range(1, n_max + 1)}
        norms = [0.0] * (n_max + 1)
        for n, cnt in counts.items():
            for ng, tf in cnt.items():
                idf = log_docs - math.log(max(1.0, df[ng]))
                w = tf * idf
                vec[n][ng] = w
                norms[n] += w * w
        return vec, [math.sqrt(v) for v in norms], len(tokens)

    scores: list[float] = []
    for prediction, refs in batch:
        if not refs:
            raise ValidationError("item with no references")
        h_vec, h_norm, h_len = tfidf_vec(prediction.lower().split())
        total = 0.0
        for ref in refs:
            r_vec, r_norm, r_len = tfidf_vec(ref.lower().split())
            delta = float(h_len - r_len)
            sim_sum = 0.0
            for n in range(1, n_max + 1):
                num = 0.0
                for ng, w in h_vec[n].items():
                    if ng in r_vec[n]:
                        # clip hypothesis counts at the reference's
                        num += min(w, r_vec[n][ng]) * r_vec[n][ng]
                if h_norm[n] > 0 and r_norm[n] > 0:
                    sim = num / (h_norm[n] * r_norm[n])
                    sim *= math.exp(-(delta**2) / (2.0 * sigma**2))
                    sim_sum += sim
            total += sim_sum / n_max
        scores.append(10.0 * total / len(refs))
    mean = sum(scores) / len(scores) if scores else 0.0
    return scores, mean


def meteor_lite(prediction: str, reference: str) -> float:
    """Simplified METEOR: exact unigram matches aligned greedily in order,
    harmonic mean weighted 9:1 toward recall, and a fragmentation penalty
    of 0.5 * (chunks / matches)^3."""
    hyp = prediction.lower().split()
    ref = reference.lower().split()
    if not hyp or not ref:
        return 0.0

    used = [False] * len(ref)
    pairs: list[tuple[int, int]] = []  # (hyp index, ref index)
    for hi, tok in enumerate(hyp):
        for ri, rtok in enumerate(ref):
            if not used[ri] and rtok == tok:
                used[ri] = True
                pairs.append((hi, ri))
                break
    m = len(pairs)
    if m == 0:
        return 0.0

    prec = m / len(hyp)
    rec = m / len(ref)
    f = 10.0 * prec * rec / (rec + 9.0 * prec)

    chunks = 0
    prev_h = prev_r = None
    for hi, ri in pairs:  # pairs are in hyp order
        if prev_h is None or hi != prev_h + 1 or ri != prev_r + 1:
            chunks += 1
        prev_h, prev_r = hi, ri
    penalty = 0.5 * (chunks / m) ** 3
    return f * (1.0 - penalty)


def meteor_lite_best(prediction: str, references: Sequence[str]) -> float:
    if not references:
        raise ValidationError("no references")
    return max(meteor_lite(prediction, ref) for ref in references)
