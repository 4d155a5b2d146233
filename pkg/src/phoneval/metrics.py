"""Recognition metrics: frame-wise feature accuracy with zero-target
exclusion, frame-wise phone accuracy, and phone error rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ToolkitError
from .phoneset import CollapsedTable


class AllZeroTargets(ToolkitError):
    pass


class AllMasked(ToolkitError):
    pass


class EmptyReference(ToolkitError):
    pass


@dataclass
class MetricReport:
    name: str
    value: float
    numerator: int
    denominator: int


def feature_accuracy(pred, gold) -> MetricReport:
    """Accuracy over (frame, feature) positions whose gold value is not 0."""
    P = np.asarray(pred, dtype=np.int8)
    G = np.asarray(gold, dtype=np.int8)
    if P.shape != G.shape:
        raise ValueError(f"shape mismatch {P.shape} vs {G.shape}")
    counted = G != 0
    denom = int(counted.sum())
    if denom == 0:
        raise AllZeroTargets("every target feature is zero-valued")
    num = int((counted & (P == G)).sum())
    return MetricReport("feature_accuracy", num / denom, num, denom)


def phone_accuracy(pred, gold, silence_mask=None) -> MetricReport:
    """Frame accuracy over non-silence frames."""
    P = np.asarray(pred).ravel()
    G = np.asarray(gold).ravel()
    if P.shape != G.shape:
        raise ValueError(f"length mismatch {len(P)} vs {len(G)}")
    keep = np.ones(len(G), dtype=bool) if silence_mask is None else ~np.asarray(silence_mask, bool)
    denom = int(keep.sum())
    if denom == 0:
        raise AllMasked("every frame is masked")
    num = int((keep & (P == G)).sum())
    return MetricReport("phone_accuracy", num / denom, num, denom)


def collapse_frames(labels, silence_mask=None) -> list[int]:
    """Masked frames are dropped first, then consecutive repeats merge."""
    L = np.asarray(labels).ravel()
    if silence_mask is not None:
        L = L[~np.asarray(silence_mask, bool)]
    out: list[int] = []
    for x in L:
        x = int(x)
        if not out or out[-1] != x:
            out.append(x)
    return out


def edit_distance(a, b) -> int:
    """Levenshtein distance with unit costs, iterative two-row DP."""
    a, b = list(a), list(b)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[len(b)]


def per(pred, gold) -> MetricReport:
    """Phone error rate: edit distance over the reference length. Can
    exceed 1 when the prediction is much longer than the reference."""
    gold = list(gold)
    if not gold:
        raise EmptyReference("empty reference sequence")
    dist = edit_distance(list(pred), gold)
    return MetricReport("per", dist / len(gold), dist, len(gold))


def phones_to_features(phone_seq, table: CollapsedTable) -> np.ndarray:
    """Class-vector lookup per element, shape (len(seq), n_features)."""
    seq = np.asarray(phone_seq, dtype=np.int64).ravel()
    if len(seq) == 0:
        return np.zeros((0, table.n_features), dtype=np.int8)
    return table.vectors[seq]
