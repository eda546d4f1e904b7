"""Similarity measures, nearest-neighbor identification, and fold-based
pair verification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core import FeatureVector


class SimilarityKind(str, Enum):
    HIST_INTERSECTION = "hi"
    CHI_SQUARE = "chi2"
    EUCLIDEAN = "l2"
    COSINE = "cos"

    @property
    def higher_is_better(self) -> bool:
        return self in (SimilarityKind.HIST_INTERSECTION, SimilarityKind.COSINE)


def similarity(a: FeatureVector, b: FeatureVector, kind: SimilarityKind) -> float:
    """Score a pair of feature vectors.

    hi: sum of element-wise minima (higher = more similar).
    chi2: sum of (a-b)^2 / (a+b), 0/0 terms contribute 0 (lower = better).
    l2: Euclidean distance (lower = better).
    cos: cosine similarity; two zero vectors score 1, one zero vector 0.
    """
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    va, vb = a.values, b.values
    if kind == SimilarityKind.HIST_INTERSECTION:
        return float(np.minimum(va, vb).sum())
    if kind == SimilarityKind.CHI_SQUARE:
        denom = va + vb
        mask = denom > 0.0
        diff = va[mask] - vb[mask]
        return float(np.sum(diff * diff / denom[mask]))
    if kind == SimilarityKind.EUCLIDEAN:
        return float(np.linalg.norm(va - vb))
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


@dataclass(frozen=True)
class GalleryEntry:
    vector: FeatureVector
    subject_id: str
    path: str = ""


@dataclass(frozen=True)
class Gallery:
    """Enrolled feature vectors; all entries must share dims."""

    entries: tuple[GalleryEntry, ...]

    def __post_init__(self):
        dims = {e.vector.dims for e in self.entries}
        if len(dims) > 1:
            raise ValueError(f"gallery entries disagree on dims: {sorted(dims)}")

    @property
    def dims(self) -> int:
        if not self.entries:
            raise ValueError("empty gallery has no dims")
        return self.entries[0].vector.dims


def nn_classify(gallery: Gallery, probe: FeatureVector, kind: SimilarityKind) -> tuple[str, float]:
    """Nearest-neighbor subject for a probe; ties go to the lowest gallery index."""
    if not gallery.entries:
        raise ValueError("cannot classify against an empty gallery")
    scores = np.array([similarity(e.vector, probe, kind) for e in gallery.entries])
    best = int(np.argmax(scores)) if kind.higher_is_better else int(np.argmin(scores))
    return gallery.entries[best].subject_id, float(scores[best])


@dataclass(frozen=True)
class VerificationResult:
    """Per-fold accuracies with the thresholds that produced them, plus a
    pooled ROC sampled at every distinct score."""

    fold_accuracies: tuple[float, ...]
    fold_thresholds: tuple[float, ...]
    mean_accuracy: float
    std_error: float
    roc: tuple[tuple[float, float], ...]
    roc_thresholds: tuple[float, ...]


def _best_threshold(scores: np.ndarray, same: np.ndarray, higher: bool) -> float:
    """Accuracy-maximizing decision threshold on a training split.

    "same" is predicted at score >= t for similarities and score <= t
    for distances. Candidates are the distinct training scores plus a
    sentinel (max+1 / min-1) that predicts everything different; ties
    are resolved toward the smallest threshold.
    """
    n = scores.size
    n_diff = int(np.sum(~same))
    uniq, inverse = np.unique(scores, return_inverse=True)
    same_per = np.bincount(inverse, weights=same.astype(np.float64))
    tot_per = np.bincount(inverse).astype(np.float64)
    sentinel_acc = n_diff / n
    if higher:
        tp = np.cumsum(same_per[::-1])[::-1]
        predicted = np.cumsum(tot_per[::-1])[::-1]
        acc = (tp + (n_diff - (predicted - tp))) / n
        best = int(np.argmax(acc))  # first max = smallest threshold
        if acc[best] >= sentinel_acc:
            return float(uniq[best])
        return float(uniq[-1] + 1.0)
    tp = np.cumsum(same_per)
    predicted = np.cumsum(tot_per)
    acc = (tp + (n_diff - (predicted - tp))) / n
    best = int(np.argmax(acc))
    if sentinel_acc >= acc[best]:  # the sentinel min-1 is the smallest candidate
        return float(uniq[0] - 1.0)
    return float(uniq[best])


def _predict(scores: np.ndarray, t: float, higher: bool) -> np.ndarray:
    return scores >= t if higher else scores <= t


def verify_scored_pairs(
    scores,
    same,
    folds,
    higher_is_better: bool,
) -> VerificationResult:
    """Fold-out verification over pre-scored pairs.

    For each fold, the decision threshold is chosen on all other folds
    (max accuracy, ties toward the smallest threshold) and applied to
    the held-out fold. Also reports the pooled ROC over all pairs as
    (false-accept, true-accept) points at every distinct score, ordered
    by increasing false-accept rate.
    """
    scores = np.asarray(scores, dtype=np.float64)
    same = np.asarray(same, dtype=bool)
    folds = np.asarray(folds, dtype=np.int64)
    if not (scores.shape == same.shape == folds.shape) or scores.ndim != 1:
        raise ValueError("scores, same and folds must be matching 1-D sequences")
    if scores.size == 0:
        raise ValueError("no pairs given")
    fold_ids = np.unique(folds)
    if fold_ids.size < 2:
        raise ValueError(f"need at least 2 folds, got {fold_ids.size}")
    if fold_ids[0] != 0 or fold_ids[-1] != fold_ids.size - 1:
        raise ValueError(f"fold indices must be contiguous from 0, got {fold_ids.tolist()}")

    accs = []
    thresholds = []
    for f in fold_ids:
        test = folds == f
        train = ~test
        t = _best_threshold(scores[train], same[train], higher_is_better)
        pred = _predict(scores[test], t, higher_is_better)
        accs.append(float(np.mean(pred == same[test])))
        thresholds.append(t)
    mean = float(np.mean(accs))
    if len(accs) > 1:
        std_error = float(np.std(accs, ddof=1) / np.sqrt(len(accs)))
    else:
        std_error = 0.0

    n_same = int(same.sum())
    n_diff = int((~same).sum())
    uniq, inverse = np.unique(scores, return_inverse=True)
    same_per = np.bincount(inverse, weights=same.astype(np.float64))
    tot_per = np.bincount(inverse).astype(np.float64)
    if higher_is_better:
        # sweep thresholds from high to low so accept rates increase
        order = slice(None, None, -1)
        tp = np.cumsum(same_per[::-1])
        predicted = np.cumsum(tot_per[::-1])
    else:
        order = slice(None)
        tp = np.cumsum(same_per)
        predicted = np.cumsum(tot_per)
    fp = predicted - tp
    tar = tp / n_same if n_same else np.zeros_like(tp)
    far = fp / n_diff if n_diff else np.zeros_like(fp)
    roc = tuple((float(f), float(t)) for f, t in zip(far, tar))
    roc_thresholds = tuple(float(u) for u in uniq[order])

    return VerificationResult(
        fold_accuracies=tuple(accs),
        fold_thresholds=tuple(float(t) for t in thresholds),
        mean_accuracy=mean,
        std_error=std_error,
        roc=roc,
        roc_thresholds=roc_thresholds,
    )


def verify_pairs(
    pairs: Sequence[tuple[FeatureVector, FeatureVector, bool, int]],
    kind: SimilarityKind,
) -> VerificationResult:
    """Score (vector_a, vector_b, same, fold) tuples and run fold-out
    verification."""
    scores = [similarity(a, b, kind) for a, b, _, _ in pairs]
    same = [bool(s) for _, _, s, _ in pairs]
    folds = [int(f) for _, _, _, f in pairs]
    return verify_scored_pairs(scores, same, folds, kind.higher_is_better)
