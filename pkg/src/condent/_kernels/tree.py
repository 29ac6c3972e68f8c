"""Array-based kd-tree construction.

The tree is a flat set of parallel arrays so the compiled and pure-numpy
query backends can traverse the same structure.  Splits are at the median
coordinate of the widest-spread dimension; leaves own contiguous slices of
the permutation array ``idx``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TreeArrays:
    idx: np.ndarray        # (n,) intp, permutation of point ids
    split_dim: np.ndarray  # (nodes,) intp, -1 for leaves
    split_val: np.ndarray  # (nodes,) float64
    left: np.ndarray       # (nodes,) intp child node ids, -1 for leaves
    right: np.ndarray
    start: np.ndarray      # (nodes,) intp leaf slice bounds into idx
    end: np.ndarray


def build_tree(points: np.ndarray, leaf_capacity: int) -> TreeArrays:
    n = points.shape[0]
    idx = np.arange(n, dtype=np.intp)
    split_dim: list[int] = []
    split_val: list[float] = []
    left: list[int] = []
    right: list[int] = []
    start: list[int] = []
    end: list[int] = []

    def new_node() -> int:
        split_dim.append(-1)
        split_val.append(0.0)
        left.append(-1)
        right.append(-1)
        start.append(0)
        end.append(0)
        return len(split_dim) - 1

    # (node, lo, hi) work items over idx[lo:hi]
    stack = [(new_node(), 0, n)]
    while stack:
        node, lo, hi = stack.pop()
        if hi - lo <= leaf_capacity:
            start[node] = lo
            end[node] = hi
            continue
        sub = points[idx[lo:hi]]
        spans = sub.max(axis=0) - sub.min(axis=0)
        dim = int(np.argmax(spans))
        mid = (lo + hi) // 2
        order = np.argpartition(sub[:, dim], mid - lo)
        idx[lo:hi] = idx[lo:hi][order]
        split_dim[node] = dim
        split_val[node] = float(points[idx[mid], dim])
        lchild = new_node()
        rchild = new_node()
        left[node] = lchild
        right[node] = rchild
        stack.append((lchild, lo, mid))
        stack.append((rchild, mid, hi))

    return TreeArrays(
        idx=idx,
        split_dim=np.asarray(split_dim, dtype=np.intp),
        split_val=np.asarray(split_val, dtype=np.float64),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        start=np.asarray(start, dtype=np.intp),
        end=np.asarray(end, dtype=np.intp),
    )
