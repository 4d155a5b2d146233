"""Independent reference implementations used to check the library.

Everything here is deliberately naive: plain recursion, exhaustive
enumeration, full-batch iteration. None of it shares code with the
package paths it validates.
"""

from __future__ import annotations

import numpy as np


def brute_edit_distance(a, b) -> int:
    """Plain recursive edit distance (with the classic equal-head shortcut)."""
    def rec(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        if a[i] == b[j]:
            return rec(i + 1, j + 1)
        return 1 + min(rec(i + 1, j), rec(i, j + 1), rec(i + 1, j + 1))

    return rec(0, 0)


def brute_dtw_min_mean(costs: np.ndarray) -> float:
    """Enumerate every monotone path and take the smallest mean cost."""
    n, m = costs.shape
    best = [np.inf]

    def walk(i, j, total, steps):
        total += costs[i, j]
        steps += 1
        if i == n - 1 and j == m - 1:
            best[0] = min(best[0], total / steps)
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, total, steps)
        if i + 1 < n:
            walk(i + 1, j, total, steps)
        if j + 1 < m:
            walk(i, j + 1, total, steps)

    walk(0, 0, 0.0, 0)
    return best[0]


def lloyd_kmeans(X: np.ndarray, init: np.ndarray, iters: int = 100) -> np.ndarray:
    """Full-batch Lloyd iterations from the given initial centroids."""
    centroids = init.astype(np.float64).copy()
    for _ in range(iters):
        d = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d.argmin(axis=1)
        new = centroids.copy()
        for c in range(len(centroids)):
            members = X[labels == c]
            if len(members):
                new[c] = members.mean(axis=0)
        if np.allclose(new, centroids, rtol=0, atol=1e-12):
            return new
        centroids = new
    return centroids


def brute_codebook_assign(entries: np.ndarray, v: np.ndarray) -> int:
    """Exhaustive scan with the l1 -> fewest-zeros -> lowest-index chain."""
    best = None
    for idx in range(len(entries)):
        l1 = int(np.abs(entries[idx].astype(int) - v.astype(int)).sum())
        zeros = int((entries[idx] == 0).sum())
        key = (l1, zeros, idx)
        if best is None or key < best:
            best = key
    return best[2]


def _triple_direction(A, B, X, dist, exclude_a):
    total, n = 0.0, 0
    for a in A:
        xs = [x for x in X if x != a] if exclude_a else list(X)
        if not xs:
            return None
        for b in B:
            for x in xs:
                dax, dbx = dist(a, x), dist(b, x)
                if dax < dbx:
                    total += 1.0
                elif dax == dbx:
                    total += 0.5
                n += 1
    if n == 0:
        return None
    return 1.0 - total / n


def brute_abx_error(items, speaker_mode, context_mode, dist):
    """Direct O(|A||B||X|) enumeration of the hierarchical ABX error.

    items carry .phone/.prev/.next/.speaker; indices into the list are the
    tokens handed to dist. Returns nan when nothing is scorable.
    """
    idxs = list(range(len(items)))

    def ctx_of(i):
        return (items[i].prev, items[i].next) if context_mode == "within" else ("*", "*")

    unit_errors: dict[tuple, float] = {}
    for ctx in sorted({ctx_of(i) for i in idxs}):
        in_ctx = [i for i in idxs if ctx_of(i) == ctx]
        speakers = sorted({items[i].speaker for i in in_ctx})
        spk_keys = (
            [(s,) for s in speakers]
            if speaker_mode == "within"
            else [(s1, s2) for s1 in speakers for s2 in speakers if s1 != s2]
        )
        for key in spk_keys:
            a_src = [i for i in in_ctx if items[i].speaker == key[0]]
            x_src = a_src if speaker_mode == "within" else [
                i for i in in_ctx if items[i].speaker == key[1]
            ]
            phones = sorted({items[i].phone for i in a_src})
            for pi, pa in enumerate(phones):
                for pb in phones[pi + 1:]:
                    A = [i for i in a_src if items[i].phone == pa]
                    B = [i for i in a_src if items[i].phone == pb]
                    XA = [i for i in x_src if items[i].phone == pa]
                    XB = [i for i in x_src if items[i].phone == pb]
                    excl = speaker_mode == "within"
                    e1 = _triple_direction(A, B, XA, dist, excl)
                    e2 = _triple_direction(B, A, XB, dist, excl)
                    if e1 is None or e2 is None:
                        continue
                    unit_errors[((pa, pb), key, ctx)] = (e1 + e2) / 2.0

    if not unit_errors:
        return float("nan")
    by_pair_spk: dict[tuple, list[float]] = {}
    for (pair, spk, _ctx), err in sorted(unit_errors.items()):
        by_pair_spk.setdefault((pair, spk), []).append(err)
    by_pair: dict[tuple, list[float]] = {}
    for (pair, _spk), errs in sorted(by_pair_spk.items()):
        by_pair.setdefault(pair, []).append(sum(errs) / len(errs))
    pair_means = [sum(v) / len(v) for _, v in sorted(by_pair.items())]
    return sum(pair_means) / len(pair_means)
