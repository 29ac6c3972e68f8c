"""Exact Euclidean k-nearest-neighbor and closed-ball queries.

A :class:`SpatialIndex` wraps a fixed point set.  Queries go through the
compiled kd-tree kernel when available; otherwise (or for ``d > 20``,
where tree pruning degrades) an exhaustive numpy scan is used.  Both
paths return identical results; ``brute_kth_neighbor_distance`` and
``brute_neighbors_within`` additionally provide a plain reference
implementation used as the test oracle.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from ._kernels import fallback
from ._kernels.tree import build_tree
from .errors import InvalidInputError

DEFAULT_LEAF_CAPACITY = 32
BRUTE_FORCE_DIM_LIMIT = 20


def validate_points(points) -> np.ndarray:
    """Validate and return an (n, d) float64 point matrix, n >= 2."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise InvalidInputError(f"points must be a 2-d array, got shape {pts.shape}")
    n, d = pts.shape
    if n < 2:
        raise InvalidInputError(f"need at least 2 points, got {n}")
    if d < 1:
        raise InvalidInputError("points must have dimension >= 1")
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("points contain non-finite coordinates")
    return pts


class SpatialIndex:
    """Immutable k-NN query structure over a fixed point set.

    backend is one of "compiled", "numpy" or "auto" (pick compiled when
    the extension exists and d <= 20).  Any number of concurrent readers
    is safe once construction returns.
    """

    def __init__(self, points, leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
                 backend: str = "auto"):
        pts = validate_points(points)
        if leaf_capacity < 1:
            raise InvalidInputError(f"leaf_capacity must be positive, got {leaf_capacity}")
        if backend not in ("auto", "compiled", "numpy"):
            raise InvalidInputError(f"unknown backend {backend!r}")
        if backend == "compiled" and not _kernels.HAVE_COMPILED:
            raise InvalidInputError("compiled kernel backend is not available")
        if backend == "auto":
            backend = ("compiled" if _kernels.HAVE_COMPILED
                       and pts.shape[1] <= BRUTE_FORCE_DIM_LIMIT else "numpy")
        self._points = pts
        self.leaf_capacity = int(leaf_capacity)
        self.backend = backend
        self._tree = build_tree(pts, self.leaf_capacity) if backend == "compiled" else None

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def n(self) -> int:
        return self._points.shape[0]

    @property
    def d(self) -> int:
        return self._points.shape[1]

    def _tree_args(self):
        t = self._tree
        return (self._points, t.idx, t.split_dim, t.split_val,
                t.left, t.right, t.start, t.end)

    def _check_point_id(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise InvalidInputError(f"point id {i} out of range [0, {self.n})")

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= self.n - 1:
            raise InvalidInputError(f"k={k} out of range [1, {self.n - 1}]")

    def kth_neighbor_distance(self, i: int, k: int) -> float:
        """Distance from point i to its k-th nearest neighbor."""
        self._check_point_id(i)
        self._check_k(k)
        ids = np.asarray([i], dtype=np.intp)
        if self.backend == "compiled":
            return float(_kernels._core.kth_distances(*self._tree_args(), ids, k)[0])
        return float(fallback.kth_distances(self._points, ids, k)[0])

    def kth_neighbor_distances(self, k: int) -> np.ndarray:
        """k-th neighbor distance for every point, in point-id order."""
        self._check_k(k)
        ids = np.arange(self.n, dtype=np.intp)
        if self.backend == "compiled":
            return _kernels._core.kth_distances(*self._tree_args(), ids, k)
        return fallback.kth_distances(self._points, ids, k)

    def neighbors_within(self, i: int, radius: float) -> np.ndarray:
        """Ids j != i with ||x_i - x_j|| <= radius (closed ball), ascending."""
        self._check_point_id(i)
        if not np.isfinite(radius) or radius < 0:
            raise InvalidInputError(f"radius must be finite and >= 0, got {radius}")
        if self.backend == "compiled":
            return _kernels._core.ball_neighbors(*self._tree_args(), i, float(radius))
        return fallback.ball_neighbors(self._points, i, float(radius))

    def count_within(self, i: int, radius: float) -> int:
        self._check_point_id(i)
        if not np.isfinite(radius) or radius < 0:
            raise InvalidInputError(f"radius must be finite and >= 0, got {radius}")
        if self.backend == "compiled":
            return _kernels._core.ball_count(*self._tree_args(), i, float(radius))
        return fallback.ball_count(self._points, i, float(radius))

    def same_label_ball_counts(self, labels: np.ndarray,
                               radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-point (same-label, total) closed-ball occupancy, self excluded."""
        labels = np.ascontiguousarray(labels, dtype=np.intp)
        radii = np.ascontiguousarray(radii, dtype=np.float64)
        if labels.shape != (self.n,) or radii.shape != (self.n,):
            raise InvalidInputError("labels and radii must have one entry per point")
        if self.backend == "compiled":
            return _kernels._core.same_label_ball_counts(*self._tree_args(), labels, radii)
        return fallback.same_label_ball_counts(self._points, labels, radii)


def build_index(points, leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
                backend: str = "auto") -> SpatialIndex:
    return SpatialIndex(points, leaf_capacity=leaf_capacity, backend=backend)


def _brute_distances(pts: np.ndarray, i: int) -> np.ndarray:
    # dimension-by-dimension accumulation, the shared distance arithmetic
    # of both backends, so oracle comparisons can demand exact equality
    acc = np.zeros(pts.shape[0])
    for t in range(pts.shape[1]):
        diff = pts[:, t] - pts[i, t]
        acc += diff * diff
    return np.sqrt(acc)


def brute_kth_neighbor_distance(points, i: int, k: int) -> float:
    """O(n) sort-based reference for the k-th neighbor distance."""
    pts = validate_points(points)
    dists = np.delete(_brute_distances(pts, i), i)
    dists.sort()
    return float(dists[k - 1])


def brute_neighbors_within(points, i: int, radius: float) -> np.ndarray:
    """Linear-scan reference for closed-ball membership."""
    pts = validate_points(points)
    hits = np.flatnonzero(_brute_distances(pts, i) <= radius)
    return hits[hits != i]
