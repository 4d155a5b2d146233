"""Dynamic time warping over frame sequences.

The distance between two sequences is the smallest mean frame distance
over all monotone alignment paths (steps: diagonal, right, down) that
join the first frame pair to the last. Minimising the mean rather than
the sum removes the bias toward short paths, so the optimum is found
with a dynamic programme stratified by path length.
"""

from __future__ import annotations

import numpy as np

from ..errors import ToolkitError

FRAME_METRICS = ("angular", "cosine", "euclidean")


class EmptySequence(ToolkitError):
    pass


def frame_distances(a: np.ndarray, b: np.ndarray, metric: str = "angular") -> np.ndarray:
    """Pairwise frame distance matrix, shape (len(a), len(b))."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("frame sequences must be 2-D (frames x dims)")
    if metric == "euclidean":
        diff = a[:, None, :] - b[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    if metric not in ("angular", "cosine"):
        raise ValueError(f"unknown frame metric {metric!r}")
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    denom = np.outer(na, nb)
    sim = np.zeros((len(a), len(b)))
    nz = denom > 0
    sim[nz] = (a @ b.T)[nz] / denom[nz]
    # zero-norm frames count as identical to each other, orthogonal to the
    # rest; bitwise-equal frames get similarity exactly 1 so that d(x, x)
    # is 0 despite dot-product rounding
    sim[np.outer(na == 0, nb == 0)] = 1.0
    sim[(a[:, None, :] == b[None, :, :]).all(axis=2)] = 1.0
    np.clip(sim, -1.0, 1.0, out=sim)
    if metric == "cosine":
        return 1.0 - sim
    return np.arccos(sim) / np.pi


def min_mean_path(costs: np.ndarray) -> float:
    """Minimum over all monotone boundary-to-boundary paths of the mean
    cell cost along the path."""
    n, m = costs.shape
    if n == 0 or m == 0:
        raise EmptySequence("empty frame sequence")
    best = np.inf
    prev = np.full((n, m), np.inf)
    prev[0, 0] = costs[0, 0]
    if np.isfinite(prev[n - 1, m - 1]):  # 1x1 case
        best = prev[n - 1, m - 1]
    for steps in range(2, n + m):
        reach = np.full((n, m), np.inf)
        reach[1:, 1:] = prev[:-1, :-1]
        np.minimum(reach[1:, :], prev[:-1, :], out=reach[1:, :])
        np.minimum(reach[:, 1:], prev[:, :-1], out=reach[:, 1:])
        cur = costs + reach
        end = cur[n - 1, m - 1]
        if np.isfinite(end):
            best = min(best, end / steps)
        prev = cur
    return float(best)


def dtw_distance(a: np.ndarray, b: np.ndarray, metric: str = "angular") -> float:
    """DTW distance between two frame sequences under the given metric."""
    if len(a) == 0 or len(b) == 0:
        raise EmptySequence("empty frame sequence")
    return min_mean_path(frame_distances(a, b, metric))
