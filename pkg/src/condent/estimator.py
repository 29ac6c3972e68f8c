"""Conditional-entropy estimation from same-label neighbor counts.

The point estimate is the sample mean of per-point terms
``log k - log(xi_i + 1)``, where ``xi_i`` counts the other observations
sharing point i's label inside the closed ball whose radius is the
distance to the k-th nearest neighbor.  Also provides the plug-in label
entropy, mutual information, the classic k-NN differential-entropy
estimate and a difference-of-entropies baseline for H(Y|X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import digamma, gammaln

from .data import Dataset
from .errors import InvalidInputError
from .spatial import DEFAULT_LEAF_CAPACITY, SpatialIndex, build_index

RHO_FLOOR = 1e-12


@dataclass(frozen=True)
class EstimatorConfig:
    """Neighbor count selection and edge-case policies.

    Either an explicit ``k`` or the power schedule ``round(c * n**alpha)``
    clamped to {1, ..., n-1}.  ``tie_clamp`` caps xi at k when duplicate
    distances put more than k points in the ball; ``clamp_nonnegative``
    only affects the reported value, never the raw estimate.
    """

    k: int | None = None
    alpha: float = 0.5
    c: float = 1.0
    tie_clamp: bool = True
    clamp_nonnegative: bool = False
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY

    def __post_init__(self):
        if self.k is None:
            if not 0.0 < self.alpha < 1.0:
                raise InvalidInputError(f"alpha must lie in (0, 1), got {self.alpha}")
            if self.c <= 0.0:
                raise InvalidInputError(f"c must be positive, got {self.c}")

    def with_k(self, k: int) -> "EstimatorConfig":
        return replace(self, k=k)


@dataclass(frozen=True)
class EstimateResult:
    value: float                  # raw estimate in nats, mean of per-point terms
    per_point_terms: np.ndarray
    k_used: int
    tie_events: int               # points whose closed ball held > k others
    negative_flag: bool
    clamp_nonnegative: bool = False

    @property
    def reported_value(self) -> float:
        """Value after the opt-in nonnegativity clamp; raw stays authoritative."""
        if self.clamp_nonnegative and self.value < 0.0:
            return 0.0
        return self.value


def resolve_k(n: int, config: EstimatorConfig) -> int:
    """Explicit k validated against {1,...,n-1}, or the schedule value."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2, got {n}")
    if config.k is not None:
        if not 1 <= config.k <= n - 1:
            raise InvalidInputError(f"k={config.k} out of range [1, {n - 1}]")
        return int(config.k)
    k = int(round(config.c * n ** config.alpha))
    return max(1, min(n - 1, k))


def xi_statistic(dataset: Dataset, index: SpatialIndex, i: int, k: int,
                 tie_clamp: bool = True) -> int:
    """Same-label count inside the closed k-th-neighbor ball of point i."""
    rho = index.kth_neighbor_distance(i, k)
    ids = index.neighbors_within(i, rho)
    xi = int(np.count_nonzero(dataset.labels[ids] == dataset.labels[i]))
    if tie_clamp:
        xi = min(xi, k)
    return xi


def conditional_entropy(dataset: Dataset, config: EstimatorConfig = EstimatorConfig(),
                        index: SpatialIndex | None = None) -> EstimateResult:
    """Point estimate of H(Y|X) in nats, with per-point terms and diagnostics.

    The mean is reduced over the histogram of xi values (each distinct
    count weighted by its frequency), which is deterministic, exactly
    permutation invariant, and exact when every point shares one xi --
    constant-label data returns log(k/(k+1)) to the last bit.
    """
    n = dataset.n
    if n < 2:
        raise InvalidInputError(f"need n >= 2, got {n}")
    k = resolve_k(n, config)
    if index is None:
        index = build_index(dataset.features, leaf_capacity=config.leaf_capacity)
    radii = index.kth_neighbor_distances(k)
    xi, total = index.same_label_ball_counts(dataset.labels, radii)
    tie_events = int(np.count_nonzero(total > k))
    if config.tie_clamp:
        xi = np.minimum(xi, k)
    terms = np.log(k / (xi + 1.0))
    counts = np.bincount(xi)
    value = float(np.dot(counts / n, np.log(k / (np.arange(len(counts)) + 1.0))))
    return EstimateResult(value=value, per_point_terms=terms, k_used=k,
                          tie_events=tie_events, negative_flag=value < 0.0,
                          clamp_nonnegative=config.clamp_nonnegative)


def label_entropy(labels) -> float:
    """Plug-in entropy of the empirical label frequencies, in nats."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise InvalidInputError("labels must be nonempty")
    _, counts = np.unique(labels, return_counts=True)
    p = counts / labels.size
    return float(-(p * np.log(p)).sum())


def mutual_information(dataset: Dataset,
                       config: EstimatorConfig = EstimatorConfig(),
                       index: SpatialIndex | None = None) -> float:
    """I(X,Y) = H(Y) - H(Y|X); may be negative from estimation noise."""
    hy = label_entropy(dataset.labels)
    hyx = conditional_entropy(dataset, config, index=index)
    return hy - hyx.value


def unit_ball_log_volume(d: int) -> float:
    return 0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)


def kl_differential_entropy(points, k: int,
                            return_diagnostics: bool = False):
    """Classic k-NN differential entropy estimate (nats).

    psi(n) - psi(k) + log V_d + (d/n) * sum_i log rho_i, with zero radii
    floored at RHO_FLOOR to keep the logarithm finite on data with
    duplicate coordinates.
    """
    index = build_index(points)
    n, d = index.n, index.d
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"k={k} out of range [1, {n - 1}]")
    radii = index.kth_neighbor_distances(k)
    floor_events = int(np.count_nonzero(radii < RHO_FLOOR))
    radii = np.maximum(radii, RHO_FLOOR)
    value = float(digamma(n) - digamma(k) + unit_ball_log_volume(d)
                  + d * np.sum(np.log(radii)) / n)
    if return_diagnostics:
        return value, floor_events
    return value


def baseline_conditional_entropy(dataset: Dataset, k: int) -> float:
    """Difference-of-entropies baseline:
    H(Y) - H_kl(X) + sum_y p(y) * H_kl(X | Y = y).
    """
    hy = label_entropy(dataset.labels)
    if dataset.m == 1:
        return 0.0  # the two differential terms cancel identically
    hx = kl_differential_entropy(dataset.features, k)
    acc = 0.0
    for y in range(dataset.m):
        mask = dataset.labels == y
        count = int(np.count_nonzero(mask))
        if count <= k:
            name = dataset.label_names[y] if dataset.label_names else str(y)
            raise InvalidInputError(
                f"class {name!r} has {count} points; needs at least {k + 1} for k={k}")
        acc += (count / dataset.n) * kl_differential_entropy(dataset.features[mask], k)
    return hy - hx + acc
