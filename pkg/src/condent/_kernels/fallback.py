"""Pure-numpy brute-force query backend.

Selected at import time when the compiled extension is unavailable (and
used unconditionally for high dimensions where tree pruning degrades).
Squared distances are accumulated dimension-by-dimension in the same
order as the compiled kernel, so both backends return identical bits.
Ball membership is decided on true distances (sqrt of the accumulated
square), which keeps the k-th neighbor inside its own ball: sqrt is
monotone, so rounding cannot push it across the boundary.
"""

from __future__ import annotations

import numpy as np


def _sq_dists_from(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    acc = np.zeros(points.shape[0])
    for t in range(points.shape[1]):
        diff = points[:, t] - q[t]
        acc += diff * diff
    return acc


def kth_distances(points: np.ndarray, query_ids: np.ndarray, k: int) -> np.ndarray:
    out = np.empty(len(query_ids))
    for pos, i in enumerate(query_ids):
        d2 = _sq_dists_from(points, points[i])
        d2[i] = np.inf
        out[pos] = np.sqrt(np.partition(d2, k - 1)[k - 1])
    return out


def same_label_ball_counts(points: np.ndarray, labels: np.ndarray,
                           radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = points.shape[0]
    same = np.zeros(n, dtype=np.intp)
    total = np.zeros(n, dtype=np.intp)
    for i in range(n):
        d2 = _sq_dists_from(points, points[i])
        d2[i] = np.inf
        inside = np.sqrt(d2) <= radii[i]
        total[i] = int(np.count_nonzero(inside))
        same[i] = int(np.count_nonzero(inside & (labels == labels[i])))
    return same, total


def ball_count(points: np.ndarray, i: int, radius: float) -> int:
    d2 = _sq_dists_from(points, points[i])
    d2[i] = np.inf
    return int(np.count_nonzero(np.sqrt(d2) <= radius))


def ball_neighbors(points: np.ndarray, i: int, radius: float) -> np.ndarray:
    d2 = _sq_dists_from(points, points[i])
    d2[i] = np.inf
    return np.flatnonzero(np.sqrt(d2) <= radius).astype(np.intp)
