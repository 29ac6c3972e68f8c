import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condent import _kernels
from condent.errors import InvalidInputError
from condent.spatial import (SpatialIndex, brute_kth_neighbor_distance,
                             brute_neighbors_within, build_index,
                             validate_points)

BACKENDS = ["numpy"] + (["compiled"] if _kernels.HAVE_COMPILED else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def test_validate_points_rejects_bad_shapes():
    with pytest.raises(InvalidInputError):
        validate_points(np.zeros(5))
    with pytest.raises(InvalidInputError):
        validate_points(np.zeros((1, 3)))
    with pytest.raises(InvalidInputError):
        validate_points([[0.0, np.nan], [1.0, 2.0]])


def test_compiled_backend_available():
    # the build is expected to produce the extension; the numpy path is a
    # fallback, not the default
    assert _kernels.HAVE_COMPILED


def test_matches_brute_force_oracle(backend, rng):
    for n, d in [(2, 1), (10, 2), (64, 3), (257, 5)]:
        pts = rng.normal(size=(n, d))
        index = SpatialIndex(pts, backend=backend)
        for k in sorted(k for k in {1, 2, n // 2, n - 1} if 1 <= k <= n - 1):
            got = index.kth_neighbor_distances(k)
            for i in range(0, n, max(1, n // 7)):
                assert got[i] == brute_kth_neighbor_distance(pts, i, k)
                assert got[i] == index.kth_neighbor_distance(i, k)
                ids = index.neighbors_within(i, got[i])
                np.testing.assert_array_equal(
                    ids, brute_neighbors_within(pts, i, got[i]))


def test_backends_agree_bit_for_bit(rng):
    if not _kernels.HAVE_COMPILED:
        pytest.skip("compiled backend unavailable")
    pts = rng.normal(size=(300, 4))
    a = SpatialIndex(pts, backend="compiled")
    b = SpatialIndex(pts, backend="numpy")
    labels = rng.integers(0, 3, size=300)
    for k in (1, 7, 40):
        ra = a.kth_neighbor_distances(k)
        np.testing.assert_array_equal(ra, b.kth_neighbor_distances(k))
        sa, ta = a.same_label_ball_counts(labels, ra)
        sb, tb = b.same_label_ball_counts(labels, ra)
        np.testing.assert_array_equal(sa, sb)
        np.testing.assert_array_equal(ta, tb)


def test_kth_distance_nondecreasing_in_k(backend, rng):
    pts = rng.normal(size=(40, 3))
    index = SpatialIndex(pts, backend=backend)
    prev = np.zeros(40)
    for k in range(1, 40):
        cur = index.kth_neighbor_distances(k)
        assert np.all(cur >= prev)
        prev = cur


def test_ball_cardinality_consistency(backend, rng):
    pts = rng.normal(size=(50, 2))  # continuous draws: distances a.s. distinct
    index = SpatialIndex(pts, backend=backend)
    for i in range(50):
        for k in (1, 5, 20):
            r = index.kth_neighbor_distance(i, k)
            assert index.count_within(i, r) == k
            assert len(index.neighbors_within(i, r)) == k


def test_ties_closed_ball_can_exceed_k(backend):
    # four corners of a square: each point has two neighbors at distance 1
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    index = SpatialIndex(pts, backend=backend)
    r = index.kth_neighbor_distance(0, 1)
    assert r == 1.0
    assert index.count_within(0, r) == 2


def test_permutation_equivariance(backend, rng):
    pts = rng.normal(size=(30, 3))
    perm = rng.permutation(30)
    a = SpatialIndex(pts, backend=backend)
    b = SpatialIndex(pts[perm], backend=backend)
    np.testing.assert_array_equal(a.kth_neighbor_distances(4)[perm],
                                  b.kth_neighbor_distances(4))


def test_high_dimension_uses_numpy_fallback(rng):
    pts = rng.normal(size=(20, 25))
    index = build_index(pts)
    assert index.backend == "numpy"
    assert index.kth_neighbor_distance(0, 3) == brute_kth_neighbor_distance(pts, 0, 3)


def test_input_validation(backend, rng):
    index = SpatialIndex(rng.normal(size=(10, 2)), backend=backend)
    with pytest.raises(InvalidInputError):
        index.kth_neighbor_distance(10, 1)
    with pytest.raises(InvalidInputError):
        index.kth_neighbor_distance(0, 10)
    with pytest.raises(InvalidInputError):
        index.neighbors_within(0, -1.0)
    with pytest.raises(InvalidInputError):
        SpatialIndex(rng.normal(size=(10, 2)), leaf_capacity=0)
    with pytest.raises(InvalidInputError):
        SpatialIndex(rng.normal(size=(10, 2)), backend="gpu")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 60),
       d=st.integers(1, 4), leaf=st.integers(1, 8))
def test_tree_exact_for_any_leaf_capacity(seed, n, d, leaf):
    if not _kernels.HAVE_COMPILED:
        pytest.skip("compiled backend unavailable")
    pts = np.random.default_rng(seed).normal(size=(n, d))
    index = SpatialIndex(pts, backend="compiled", leaf_capacity=leaf)
    k = max(1, n // 3)
    got = index.kth_neighbor_distances(k)
    want = [brute_kth_neighbor_distance(pts, i, k) for i in range(n)]
    np.testing.assert_array_equal(got, want)
