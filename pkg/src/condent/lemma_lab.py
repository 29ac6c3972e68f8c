"""Empirical checks of the exact distributional laws behind the estimator.

Two facts are verifiable by simulation: conditioned on the k-th neighbor
radius, the same-label ball count follows a two-term binomial mixture,
and the k-th neighbor radius itself has an explicit density/CDF driven by
the feature distance law.  This module evaluates those formulas and
compares them against Monte Carlo at configurable thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln
from scipy.stats import binom

from .errors import InconclusiveError, InvalidInputError
from .models import (ModelSpec, ball_label_probability, feature_distance_law,
                     sample_joint, sphere_label_probability)
from .rng import substream

DEFAULT_TV_THRESHOLD = 0.05
DEFAULT_MIN_HITS = 500


@dataclass(frozen=True)
class MixturePmf:
    """Conditional law of the same-label count given the k-NN radius."""

    k: int
    p: float
    alpha: float
    pmf: np.ndarray  # length k+1 over r in {0,...,k}


@dataclass(frozen=True)
class LawCheckReport:
    empirical_pmf: np.ndarray
    analytic_pmf: np.ndarray
    tv_distance: float
    replicates_used: int     # conditioned shell hits
    replicates_total: int
    shell: tuple[float, float]
    threshold: float
    acceptance: bool
    p: float
    alpha: float


@dataclass(frozen=True)
class KsReport:
    statistic: float
    samples: int
    band95: float
    within_band: bool
    n: int
    k: int


def conditional_xi_law(k: int, p: float, alpha: float) -> MixturePmf:
    """Two-term binomial mixture pmf over r in {0,...,k}.

    pmf(r) = C(k-1,r) p^r (1-p)^(k-1-r) * alpha
           + C(k-1,r-1) p^(r-1) (1-p)^(k-r) * (1-alpha),
    with out-of-range binomial coefficients treated as zero.
    """
    if k < 1:
        raise InvalidInputError(f"need k >= 1, got {k}")
    if not (0.0 <= p <= 1.0 and 0.0 <= alpha <= 1.0):
        raise InvalidInputError("p and alpha must lie in [0, 1]")
    r = np.arange(k + 1)
    base = binom.pmf(r, k - 1, p)          # zero for r = k
    shifted = binom.pmf(r - 1, k - 1, p)   # zero for r = 0
    pmf = alpha * base + (1.0 - alpha) * shifted
    return MixturePmf(k=k, p=float(p), alpha=float(alpha), pmf=pmf)


def radius_cdf(p_of_u, n: int, k: int):
    """Analytic CDF of the k-NN radius: P(rho <= t) as a callable of t."""
    _check_nk(n, k)

    def cdf(t):
        p = np.asarray(p_of_u(t), dtype=np.float64)
        return binom.sf(k - 1, n - 1, p)

    return cdf


def _check_nk(n: int, k: int) -> None:
    if n < 2:
        raise InvalidInputError(f"need n >= 2, got {n}")
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"k={k} out of range [1, {n - 1}]")


def radius_density_sum(n: int, k: int, p) -> np.ndarray:
    """Term-by-term evaluation of the radius-density bracket

    sum_{j=k}^{n-1} C(n-1,j) [ j p^(j-1) (1-p)^(n-1-j)
                               - p^j (n-j-1) (1-p)^(n-j-2) ].

    Binomial coefficients are taken in log space so the sum stays usable
    up to n ~ 1e4.
    """
    _check_nk(n, k)
    p = np.asarray(p, dtype=np.float64)
    scalar = p.ndim == 0
    # clip away the exact endpoints so the log-space powers stay defined
    p = np.clip(np.atleast_1d(p), 1e-300, 1.0 - 1e-16)
    j = np.arange(k, n)  # j = k .. n-1
    log_choose = gammaln(n) - gammaln(j + 1) - gammaln(n - j)
    logp = np.log(p)[:, None]
    logq = np.log1p(-p)[:, None]
    t1 = j * np.exp(log_choose + (j - 1) * logp + (n - 1 - j) * logq)
    # the j = n-1 term has factor (n-j-1) = 0; clamp its exponent to keep exp finite
    t2 = (n - j - 1) * np.exp(log_choose + j * logp + np.maximum(n - j - 2, 0) * logq)
    out = (t1 - t2).sum(axis=1)
    return out[0] if scalar else out


def order_statistic_density_weight(n: int, k: int, p) -> np.ndarray:
    """Closed-form k-th order-statistic weight k C(n-1,k) p^(k-1) (1-p)^(n-1-k)."""
    _check_nk(n, k)
    p = np.asarray(p, dtype=np.float64)
    return (n - 1) * binom.pmf(k - 1, n - 2, p)


def knn_distance_density(p_of_u, f_of_u, n: int, k: int, u):
    """Density of the k-NN radius at u for the distance law (p_of_u, f_of_u)."""
    _check_nk(n, k)
    u = np.asarray(u, dtype=np.float64)
    return radius_density_sum(n, k, p_of_u(u)) * np.asarray(f_of_u(u), dtype=np.float64)


# ---------------------------------------------------------------------------
# simulation

def _simulate_rho_xi(spec: ModelSpec, x: np.ndarray, y: int, n: int, k: int,
                     replicates: int, rng: np.random.Generator,
                     chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Replicates of (rho, xi) for a fixed query point (x, y) and n-1 fresh draws."""
    rhos = np.empty(replicates)
    xis = np.empty(replicates, dtype=np.intp)
    done = 0
    while done < replicates:
        reps = min(chunk, replicates - done)
        feats, labels = sample_joint(spec, reps * (n - 1), rng)
        feats = feats.reshape(reps, n - 1, spec.d)
        labels = labels.reshape(reps, n - 1)
        acc = np.zeros((reps, n - 1))
        for dim in range(spec.d):
            diff = feats[:, :, dim] - x[dim]
            acc += diff * diff
        dist = np.sqrt(acc)
        rho = np.partition(dist, k - 1, axis=1)[:, k - 1]
        xi = np.count_nonzero((labels == y) & (dist <= rho[:, None]), axis=1)
        rhos[done:done + reps] = rho
        xis[done:done + reps] = xi
        done += reps
    return rhos, xis


def median_radius(spec: ModelSpec, x, n: int, k: int,
                  seed: int = 0, draws: int = 4000) -> float:
    """Median of the k-NN radius at x; analytic when the distance law is."""
    _check_nk(n, k)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    try:
        p_of_u, _ = feature_distance_law(spec, x)
    except InvalidInputError:
        rng = substream(seed, "median-radius")
        rhos, _ = _simulate_rho_xi(spec, x, 0, n, k, draws, rng)
        return float(np.median(rhos))
    cdf = radius_cdf(p_of_u, n, k)
    hi = 1.0
    while cdf(hi) < 0.5:
        hi *= 2.0
        if hi > 1e12:
            raise InvalidInputError("median radius search diverged")
    return float(brentq(lambda t: cdf(t) - 0.5, 1e-12, hi, xtol=1e-12))


def verify_conditional_law(spec: ModelSpec, x, y: int, n: int, k: int,
                           t: float, delta: float, replicates: int, seed: int,
                           p: float | None = None, alpha: float | None = None,
                           threshold: float = DEFAULT_TV_THRESHOLD,
                           min_hits: int = DEFAULT_MIN_HITS) -> LawCheckReport:
    """Simulate the conditional law of xi on the shell (t-delta, t+delta].

    Retains replicates whose radius lands in the half-open shell, matching
    the limit construction the mixture law comes from, and reports the
    total-variation distance to the analytic pmf with p and alpha taken at
    the shell center.
    """
    _check_nk(n, k)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not 0.0 < delta < t:
        raise InvalidInputError(f"need 0 < delta < t, got delta={delta}, t={t}")
    if replicates < 1:
        raise InvalidInputError("replicates must be positive")
    rng = substream(seed, "lemma-check")
    rhos, xis = _simulate_rho_xi(spec, x, y, n, k, replicates, rng)
    mask = (rhos > t - delta) & (rhos <= t + delta)
    hits = int(np.count_nonzero(mask))
    if hits < min_hits:
        raise InconclusiveError(
            f"only {hits} of {replicates} replicates landed in the shell "
            f"(need {min_hits}); increase replicates or widen delta", hits=hits)
    xi_hits = np.minimum(xis[mask], k)  # ties beyond k occur with probability 0
    empirical = np.bincount(xi_hits, minlength=k + 1).astype(np.float64) / hits
    if p is None:
        p = ball_label_probability(spec, x, y, t, seed=seed).value
    if alpha is None:
        alpha = 1.0 - sphere_label_probability(spec, x, y, t, seed=seed).value
    analytic = conditional_xi_law(k, p, alpha).pmf
    tv = 0.5 * float(np.abs(empirical - analytic).sum())
    return LawCheckReport(empirical_pmf=empirical, analytic_pmf=analytic,
                          tv_distance=tv, replicates_used=hits,
                          replicates_total=replicates, shell=(float(t), float(delta)),
                          threshold=float(threshold), acceptance=tv <= threshold,
                          p=float(p), alpha=float(alpha))


def verify_distance_distribution(spec: ModelSpec, x, n: int, k: int,
                                 samples: int, seed: int) -> KsReport:
    """KS statistic between simulated k-NN radii and the analytic CDF."""
    _check_nk(n, k)
    if samples < 2:
        raise InvalidInputError("need at least 2 samples")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    p_of_u, _ = feature_distance_law(spec, x)
    cdf = radius_cdf(p_of_u, n, k)
    rng = substream(seed, "density-check")
    rhos, _ = _simulate_rho_xi(spec, x, 0, n, k, samples, rng)
    rhos.sort()
    f = np.asarray(cdf(rhos), dtype=np.float64)
    grid = np.arange(1, samples + 1) / samples
    ks = float(max(np.abs(grid - f).max(), np.abs(grid - 1.0 / samples - f).max()))
    band = 1.36 / math.sqrt(samples)
    return KsReport(statistic=ks, samples=samples, band95=band,
                    within_band=ks <= band, n=n, k=k)
