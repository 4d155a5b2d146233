"""Frame pseudo-labels: K-means clusters, frequent feature vectors,
frequent phones and the full observed phone set.

The labels file is a TSV of ``utt_id<TAB>space-separated integers``.
The codebook file has one ternary vector (+/-/0 characters) and its
count per line, most frequent first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ToolkitError
from .phoneset import CollapsedTable, lex_key, string_to_vector, vector_to_string


class TooFewPoints(ToolkitError):
    pass


class DimensionMismatch(ToolkitError):
    pass


class EmptyCodebook(ToolkitError):
    pass


class EmptyInput(ToolkitError):
    pass


@dataclass
class ClusterModel:
    centroids: np.ndarray  # (K, d) float64
    inertia_history: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def d(self) -> int:
        return self.centroids.shape[1]


@dataclass
class LabelSequence:
    utt_id: str
    labels: np.ndarray  # int32
    space_size: int


def _nearest(points: np.ndarray, centroids: np.ndarray):
    """Index of the closest centroid per point (squared Euclidean), ties to
    the lowest index, plus the squared distances."""
    n = len(points)
    # cap the (chunk, k, d) difference tensor at ~32 MB
    chunk = max(1, int(4e6 // max(1, centroids.shape[0] * points.shape[1])))
    labels = np.empty(n, dtype=np.int64)
    d2 = np.empty(n, dtype=np.float64)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        diff = points[lo:hi, None, :] - centroids[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        labels[lo:hi] = np.argmin(dist, axis=1)
        d2[lo:hi] = dist[np.arange(hi - lo), labels[lo:hi]]
    return labels, d2


def _kmeans_pp_init(sample: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = np.empty((k, sample.shape[1]), dtype=np.float64)
    centroids[0] = sample[rng.integers(len(sample))]
    d2 = None
    for j in range(1, k):
        _, d2 = _nearest(sample, centroids[:j])
        total = d2.sum()
        if total > 0:
            idx = rng.choice(len(sample), p=d2 / total)
        else:
            idx = rng.integers(len(sample))
        centroids[j] = sample[idx]
    return centroids


def full_inertia(frames: np.ndarray, centroids: np.ndarray) -> float:
    """Mean squared distance of every frame to its nearest centroid."""
    _, d2 = _nearest(frames, centroids)
    return float(d2.mean())


def minibatch_kmeans(
    frames,
    k: int = 100,
    batch_size: int = 1024,
    epochs: int = 5,
    seed: int = 0,
    init_sample: int | None = None,
) -> ClusterModel:
    """Mini-batch K-means with k-means++ init from a seeded sample.

    Each batch is assigned to its nearest centroids, then centroids move to
    the running mean of everything assigned to them so far. Clusters that
    have never received a point are reseeded to the batch point farthest
    from its nearest centroid. The epoch-end full-data inertia (mean
    squared distance) is recorded in inertia_history.
    """
    X = np.ascontiguousarray(np.asarray(frames), dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("frames must be a 2-D matrix")
    n = len(X)
    if n < k:
        raise TooFewPoints(f"{n} frames for k={k}")
    rng = np.random.default_rng(seed)
    if init_sample is None:
        init_sample = min(n, max(20 * k, 512))
    sample_idx = rng.choice(n, size=min(n, init_sample), replace=False)
    centroids = _kmeans_pp_init(X[sample_idx], k, rng)
    counts = np.zeros(k, dtype=np.int64)
    history: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            batch = X[order[lo:lo + batch_size]]
            labels, d2 = _nearest(batch, centroids)
            present = np.unique(labels)
            batch_counts = np.bincount(labels, minlength=k)
            sums = np.zeros_like(centroids)
            np.add.at(sums, labels, batch)
            new_counts = counts[present] + batch_counts[present]
            centroids[present] += (
                sums[present] - batch_counts[present, None] * centroids[present]
            ) / new_counts[:, None]
            counts[present] = new_counts
            never_used = np.flatnonzero(counts == 0)
            if len(never_used):
                far = np.argsort(-d2, kind="stable")
                for c, point in zip(never_used, far[: len(never_used)]):
                    centroids[c] = batch[point]
                    counts[c] = 1
        history.append(full_inertia(X, centroids))
    return ClusterModel(centroids, history)


def assign_kmeans(model: ClusterModel, frames) -> np.ndarray:
    """Nearest-centroid label per frame; ties go to the lowest index."""
    X = np.asarray(frames, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise DimensionMismatch(f"frames have dim {X.shape[-1]}, model expects {model.d}")
    labels, _ = _nearest(X, model.centroids)
    return labels.astype(np.int32)


@dataclass
class FeatureCodebook:
    entries: np.ndarray  # (K, n_features) int8, most frequent first
    frequencies: np.ndarray  # int64, non-increasing
    truncated: bool = False  # fewer distinct vectors than requested

    def __len__(self) -> int:
        return len(self.entries)


def hard_threshold(values) -> np.ndarray:
    """Binarise real-valued feature predictions at zero: > 0 is +, else -."""
    return np.where(np.asarray(values) > 0, 1, -1).astype(np.int8)


def top_frequent_vectors(vectors, k: int = 100) -> FeatureCodebook:
    """Codebook of the k most frequent distinct vectors. Count ties break
    lexicographically on the vector with the fixed + < 0 < - order."""
    V = np.asarray(vectors, dtype=np.int8)
    if V.ndim != 2 or len(V) == 0:
        raise EmptyInput("no feature vectors")
    distinct, counts = np.unique(V, axis=0, return_counts=True)
    order = sorted(range(len(distinct)), key=lambda i: (-counts[i], lex_key(distinct[i])))
    kept = order[:k]
    return FeatureCodebook(
        entries=distinct[kept],
        frequencies=counts[kept].astype(np.int64),
        truncated=len(distinct) < k,
    )


def _assignment_rank(entries: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """(n, K) integer rank combining l1 distance with the zero-count tie
    break; argmin of a row is the assigned entry (first hit = lowest index)."""
    E = entries.astype(np.int32)
    V = np.asarray(vectors, dtype=np.int32)
    l1 = np.abs(V[:, None, :] - E[None, :, :]).sum(axis=2)
    zeros = (E == 0).sum(axis=1)
    width = E.shape[1] + 1
    return l1 * width + zeros[None, :]


def assign_feature_codebook(codebook: FeatureCodebook, vector) -> int:
    """Codebook index minimising l1 distance; ties prefer the entry with the
    fewest zero-valued features, then the lowest index."""
    return int(assign_feature_codebook_batch(codebook, np.asarray(vector)[None, :])[0])


def assign_feature_codebook_batch(codebook: FeatureCodebook, vectors) -> np.ndarray:
    if len(codebook) == 0:
        raise EmptyCodebook("codebook has no entries")
    V = np.asarray(vectors, dtype=np.int8)
    if V.shape[-1] != codebook.entries.shape[1]:
        raise DimensionMismatch(
            f"vectors have {V.shape[-1]} features, codebook has {codebook.entries.shape[1]}"
        )
    return np.argmin(_assignment_rank(codebook.entries, V), axis=1).astype(np.int32)


def top_frequent_phones(frame_phone_labels, k: int = 100) -> list[int]:
    """The k most frequent phone classes, most frequent first; count ties
    break toward the lower class id. Negative labels (silence) are ignored."""
    labels = np.asarray(frame_phone_labels).ravel()
    labels = labels[labels >= 0]
    if len(labels) == 0:
        raise EmptyInput("no phone labels")
    classes, counts = np.unique(labels, return_counts=True)
    order = sorted(range(len(classes)), key=lambda i: (-counts[i], classes[i]))
    return [int(classes[i]) for i in order[:k]]


def restrict_phone_set(
    frame_phone_labels,
    allowed: list[int],
    table: CollapsedTable,
) -> np.ndarray:
    """Relabel frames into the dense 0..len(allowed)-1 space.

    Frames whose class is outside the allowed list (or silence, < 0) map to
    the nearest allowed class by feature l1, preferring fewer zeros then
    the lowest label index.
    """
    if not allowed:
        raise EmptyInput("allowed phone set is empty")
    labels = np.asarray(frame_phone_labels, dtype=np.int64).ravel()
    codebook = FeatureCodebook(table.vectors[np.asarray(allowed)], np.zeros(len(allowed), np.int64))
    dense = {cls: i for i, cls in enumerate(allowed)}
    out = np.empty(len(labels), dtype=np.int32)
    known = np.isin(labels, np.asarray(allowed))
    out[known] = [dense[int(c)] for c in labels[known]]
    stray = ~known
    if stray.any():
        stray_classes = labels[stray]
        vectors = np.zeros((len(stray_classes), table.n_features), dtype=np.int8)
        real = stray_classes >= 0
        vectors[real] = table.vectors[stray_classes[real]]
        out[stray] = assign_feature_codebook_batch(codebook, vectors)
    return out


def observed_phone_set(frame_phone_labels) -> list[int]:
    """All phone classes observed in the labels, ascending."""
    labels = np.asarray(frame_phone_labels).ravel()
    labels = labels[labels >= 0]
    if len(labels) == 0:
        raise EmptyInput("no phone labels")
    return [int(c) for c in np.unique(labels)]


def write_labels(sequences: list[LabelSequence], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for seq in sequences:
            f.write(seq.utt_id + "\t" + " ".join(str(int(x)) for x in seq.labels) + "\n")


def read_labels(path, space_size: int = 0) -> list[LabelSequence]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            utt_id, _, rest = line.partition("\t")
            labels = np.array([int(x) for x in rest.split()] if rest else [], dtype=np.int32)
            out.append(LabelSequence(utt_id, labels, space_size))
    return out


def write_codebook(codebook: FeatureCodebook, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for vec, count in zip(codebook.entries, codebook.frequencies):
            f.write(f"{vector_to_string(vec)}\t{int(count)}\n")


def read_codebook(path) -> FeatureCodebook:
    entries, counts = [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            chars, _, count = line.partition("\t")
            entries.append(string_to_vector(chars))
            counts.append(int(count))
    if not entries:
        raise EmptyCodebook(f"{path}: no entries")
    return FeatureCodebook(np.stack(entries), np.array(counts, dtype=np.int64))
