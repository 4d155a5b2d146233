"""Phonetic inventory discovery from feature-vector frequencies.

High-frequency discrete feature vectors are mapped to phone classes and
thresholded, either keeping a fixed number of vectors (top-K) or every
vector above a minimum count. Predictions are scored against a gold
phone set with precision, recall and F1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ToolkitError
from .labeler import FeatureCodebook, assign_feature_codebook_batch
from .phoneset import CollapsedTable, lex_key


class EmptyInput(ToolkitError):
    pass


class EmptyGold(ToolkitError):
    pass


@dataclass
class FrequencyDistribution:
    counts: dict[tuple, int]  # feature-vector tuple -> frame count

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)


def feature_vector_frequencies(frame_vectors) -> FrequencyDistribution:
    V = np.asarray(frame_vectors, dtype=np.int8)
    if V.ndim != 2 or len(V) == 0:
        raise EmptyInput("no frame vectors")
    distinct, counts = np.unique(V, axis=0, return_counts=True)
    return FrequencyDistribution(
        {tuple(int(x) for x in vec): int(c) for vec, c in zip(distinct, counts)}
    )


def vectors_to_phones(
    dist: FrequencyDistribution, table: CollapsedTable
) -> dict[tuple, tuple[str, bool]]:
    """Map each distinct vector to (representative segment, exact flag).

    Vectors matching a table class map to its representative; the rest go
    to the nearest class by l1 with the fewest-zeros-then-lowest-index tie
    chain, flagged exact=False.
    """
    exact = {tuple(int(x) for x in vec): idx for idx, vec in enumerate(table.vectors)}
    out: dict[tuple, tuple[str, bool]] = {}
    missing = []
    for vec in dist.counts:
        idx = exact.get(vec)
        if idx is not None:
            out[vec] = (table.representatives[idx], True)
        else:
            missing.append(vec)
    if missing:
        codebook = FeatureCodebook(table.vectors, np.zeros(len(table.vectors), np.int64))
        nearest = assign_feature_codebook_batch(codebook, np.array(missing, dtype=np.int8))
        for vec, idx in zip(missing, nearest):
            out[vec] = (table.representatives[int(idx)], False)
    return out


@dataclass
class InventoryPrediction:
    phones: set[str]
    threshold_used: dict
    vector_phones: dict[tuple, tuple[str, bool]]  # kept vectors only


def predict_inventory(
    dist: FrequencyDistribution,
    table: CollapsedTable,
    rule: dict,
) -> InventoryPrediction:
    """Apply a {"top_k": K} or {"min_count": c} rule and map to phones."""
    mapping = vectors_to_phones(dist, table)
    if "top_k" in rule:
        k = int(rule["top_k"])
        order = sorted(dist.counts, key=lambda v: (-dist.counts[v], lex_key(v)))
        kept = order[:k]
    elif "min_count" in rule:
        c = int(rule["min_count"])
        kept = [v for v in dist.counts if dist.counts[v] >= c]
    else:
        raise ValueError(f"rule must carry top_k or min_count, got {rule!r}")
    vector_phones = {v: mapping[v] for v in kept}
    return InventoryPrediction(
        phones={mapping[v][0] for v in kept},
        threshold_used=dict(rule),
        vector_phones=vector_phones,
    )


@dataclass
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    precision_undefined: bool = False
    recall_undefined: bool = False


def evaluate_inventory(pred: set, gold: set) -> PRF:
    """Set precision/recall/F1. Empty pred against nonempty gold leaves
    precision undefined; it is reported as 0 with the flag raised (and
    symmetrically for recall)."""
    pred, gold = set(pred), set(gold)
    tp = len(pred & gold)
    fp = len(pred - gold)
    fn = len(gold - pred)
    precision_undefined = recall_undefined = False
    if pred:
        precision = tp / (tp + fp)
    elif not gold:
        precision = 1.0
    else:
        precision, precision_undefined = 0.0, True
    if gold:
        recall = tp / (tp + fn)
    elif not pred:
        recall = 1.0
    else:
        recall, recall_undefined = 0.0, True
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PRF(precision, recall, f1, tp, fp, fn, precision_undefined, recall_undefined)


def f1_optimal_threshold(
    dist: FrequencyDistribution,
    table: CollapsedTable,
    gold: set,
) -> tuple[int, PRF]:
    """Exhaustive scan of min-count thresholds maximising F1.

    Candidates are the observed distinct counts plus one past the maximum
    (the empty inventory); F1 is piecewise constant between them, so the
    scan is exact. F1 ties go to the larger threshold.
    """
    if not gold:
        raise EmptyGold("gold inventory is empty")
    if not dist.counts:
        raise EmptyInput("empty frequency distribution")
    mapping = vectors_to_phones(dist, table)
    candidates = sorted(set(dist.counts.values()))
    candidates.append(candidates[-1] + 1)
    best: tuple[int, PRF] | None = None
    for c in candidates:
        phones = {mapping[v][0] for v, count in dist.counts.items() if count >= c}
        prf = evaluate_inventory(phones, gold)
        if best is None or prf.f1 > best[1].f1 or (prf.f1 == best[1].f1 and c > best[0]):
            best = (c, prf)
    return best


def read_gold_inventory(path) -> set[str]:
    with open(path, encoding="utf-8") as f:
        return {line.strip() for line in f if line.strip()}
