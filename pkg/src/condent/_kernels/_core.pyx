# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kd-tree query kernels.

Exact Euclidean k-th neighbor distances and closed-ball counts over the
array-based tree built in :mod:`condent._kernels.tree`.  Squared distances
are accumulated dimension-by-dimension exactly as in the numpy fallback,
so both backends return identical bits.  Ball membership compares
sqrt(squared distance) <= radius: sqrt is monotone, so the k-th neighbor
always lands inside the ball of its own k-th distance.  Subtree pruning
uses |coordinate gap| > radius, which can never exclude an accepted point
because sqrt(acc) >= sqrt(gap^2) = |gap| in round-to-nearest.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, sqrt

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.intp_t ip


cdef inline f64 _sqdist(const f64 *a, const f64 *b, Py_ssize_t d) nogil:
    cdef f64 acc = 0.0
    cdef f64 diff
    cdef Py_ssize_t t
    for t in range(d):
        diff = a[t] - b[t]
        acc += diff * diff
    return acc


cdef void _heap_push(f64 *heap, Py_ssize_t *size, Py_ssize_t cap, f64 val) nogil:
    # max-heap holding the k smallest squared distances seen so far
    cdef Py_ssize_t pos, child, parent
    cdef f64 tmp
    if size[0] < cap:
        pos = size[0]
        heap[pos] = val
        size[0] += 1
        while pos > 0:
            parent = (pos - 1) >> 1
            if heap[parent] < heap[pos]:
                tmp = heap[parent]; heap[parent] = heap[pos]; heap[pos] = tmp
                pos = parent
            else:
                break
    elif val < heap[0]:
        heap[0] = val
        pos = 0
        while True:
            child = 2 * pos + 1
            if child >= cap:
                break
            if child + 1 < cap and heap[child + 1] > heap[child]:
                child += 1
            if heap[child] > heap[pos]:
                tmp = heap[child]; heap[child] = heap[pos]; heap[pos] = tmp
                pos = child
            else:
                break


cdef void _knn_visit(const f64[:, ::1] pts,
                     const ip[:] idx, const ip[:] sdim, const f64[:] sval,
                     const ip[:] left, const ip[:] right,
                     const ip[:] start, const ip[:] end,
                     Py_ssize_t node, const f64 *q, Py_ssize_t skip,
                     f64 *heap, Py_ssize_t *hsize, Py_ssize_t k) nogil:
    cdef Py_ssize_t j, pid, near, far
    cdef Py_ssize_t d = pts.shape[1]
    cdef f64 diff, d2, worst
    if sdim[node] < 0:
        for j in range(start[node], end[node]):
            pid = idx[j]
            if pid == skip:
                continue
            d2 = _sqdist(&pts[pid, 0], q, d)
            _heap_push(heap, hsize, k, d2)
        return
    diff = q[sdim[node]] - sval[node]
    if diff <= 0:
        near = left[node]; far = right[node]
    else:
        near = right[node]; far = left[node]
    _knn_visit(pts, idx, sdim, sval, left, right, start, end,
               near, q, skip, heap, hsize, k)
    worst = heap[0] if hsize[0] == k else INFINITY
    if diff * diff <= worst:
        _knn_visit(pts, idx, sdim, sval, left, right, start, end,
                   far, q, skip, heap, hsize, k)


cdef void _ball_visit(const f64[:, ::1] pts,
                      const ip[:] idx, const ip[:] sdim, const f64[:] sval,
                      const ip[:] left, const ip[:] right,
                      const ip[:] start, const ip[:] end,
                      Py_ssize_t node, const f64 *q, Py_ssize_t skip, f64 r,
                      const ip[:] labels, Py_ssize_t lab,
                      Py_ssize_t *total, Py_ssize_t *same) nogil:
    cdef Py_ssize_t j, pid, near, far
    cdef Py_ssize_t d = pts.shape[1]
    cdef f64 diff
    if sdim[node] < 0:
        for j in range(start[node], end[node]):
            pid = idx[j]
            if pid == skip:
                continue
            if sqrt(_sqdist(&pts[pid, 0], q, d)) <= r:
                total[0] += 1
                if labels is not None and labels[pid] == lab:
                    same[0] += 1
        return
    diff = q[sdim[node]] - sval[node]
    if diff <= 0:
        near = left[node]; far = right[node]
    else:
        near = right[node]; far = left[node]
    _ball_visit(pts, idx, sdim, sval, left, right, start, end,
                near, q, skip, r, labels, lab, total, same)
    if fabs(diff) <= r:
        _ball_visit(pts, idx, sdim, sval, left, right, start, end,
                    far, q, skip, r, labels, lab, total, same)


cdef void _collect_visit(const f64[:, ::1] pts,
                         const ip[:] idx, const ip[:] sdim, const f64[:] sval,
                         const ip[:] left, const ip[:] right,
                         const ip[:] start, const ip[:] end,
                         Py_ssize_t node, const f64 *q, Py_ssize_t skip, f64 r,
                         ip *out, Py_ssize_t *count) nogil:
    cdef Py_ssize_t j, pid, near, far
    cdef Py_ssize_t d = pts.shape[1]
    cdef f64 diff
    if sdim[node] < 0:
        for j in range(start[node], end[node]):
            pid = idx[j]
            if pid == skip:
                continue
            if sqrt(_sqdist(&pts[pid, 0], q, d)) <= r:
                out[count[0]] = pid
                count[0] += 1
        return
    diff = q[sdim[node]] - sval[node]
    if diff <= 0:
        near = left[node]; far = right[node]
    else:
        near = right[node]; far = left[node]
    _collect_visit(pts, idx, sdim, sval, left, right, start, end,
                   near, q, skip, r, out, count)
    if fabs(diff) <= r:
        _collect_visit(pts, idx, sdim, sval, left, right, start, end,
                       far, q, skip, r, out, count)


def kth_distances(const f64[:, ::1] pts,
                  const ip[:] idx, const ip[:] sdim, const f64[:] sval,
                  const ip[:] left, const ip[:] right,
                  const ip[:] start, const ip[:] end,
                  const ip[:] query_ids, Py_ssize_t k):
    """k-th smallest distance from each query point to the rest of the set."""
    cdef Py_ssize_t nq = query_ids.shape[0]
    cdef cnp.ndarray[f64, ndim=1] out = np.empty(nq, dtype=np.float64)
    cdef cnp.ndarray[f64, ndim=1] heap_arr = np.empty(k, dtype=np.float64)
    cdef f64 *heap = <f64 *> cnp.PyArray_DATA(heap_arr)
    cdef Py_ssize_t qi, i, hsize
    with nogil:
        for i in range(nq):
            qi = query_ids[i]
            hsize = 0
            _knn_visit(pts, idx, sdim, sval, left, right, start, end,
                       0, &pts[qi, 0], qi, heap, &hsize, k)
            out[i] = sqrt(heap[0])
    return out


def same_label_ball_counts(const f64[:, ::1] pts,
                           const ip[:] idx, const ip[:] sdim, const f64[:] sval,
                           const ip[:] left, const ip[:] right,
                           const ip[:] start, const ip[:] end,
                           const ip[:] labels, const f64[:] radii):
    """Per-point closed-ball occupancy: (same-label count, total count)."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[ip, ndim=1] same = np.zeros(n, dtype=np.intp)
    cdef cnp.ndarray[ip, ndim=1] total = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t i, t, s
    with nogil:
        for i in range(n):
            t = 0
            s = 0
            _ball_visit(pts, idx, sdim, sval, left, right, start, end,
                        0, &pts[i, 0], i, radii[i], labels, labels[i], &t, &s)
            total[i] = t
            same[i] = s
    return same, total


def ball_count(const f64[:, ::1] pts,
               const ip[:] idx, const ip[:] sdim, const f64[:] sval,
               const ip[:] left, const ip[:] right,
               const ip[:] start, const ip[:] end,
               Py_ssize_t i, f64 radius):
    """Number of points other than `i` inside the closed ball around point `i`."""
    cdef Py_ssize_t t = 0, s = 0
    _ball_visit(pts, idx, sdim, sval, left, right, start, end,
                0, &pts[i, 0], i, radius, None, 0, &t, &s)
    return t


def ball_neighbors(const f64[:, ::1] pts,
                   const ip[:] idx, const ip[:] sdim, const f64[:] sval,
                   const ip[:] left, const ip[:] right,
                   const ip[:] start, const ip[:] end,
                   Py_ssize_t i, f64 radius):
    """Ids of points other than `i` inside the closed ball around point `i`."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[ip, ndim=1] buf = np.empty(n, dtype=np.intp)
    cdef ip *out = <ip *> cnp.PyArray_DATA(buf)
    cdef Py_ssize_t count = 0
    _collect_visit(pts, idx, sdim, sval, left, right, start, end,
                   0, &pts[i, 0], i, radius, out, &count)
    res = buf[:count].copy()
    res.sort()
    return res
