"""Generative mixed-pair models with analytic posteriors and oracles.

Two families: a logistic label on a Gaussian feature vector, and
class-conditional Gaussians with discrete priors.  Both expose exact
posteriors, reproducible sampling, and numeric ground truth for the
conditional entropy (1-d quadrature for the logistic family, Monte Carlo
with a reported standard error for the class-Gaussian family).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import solve_triangular
from scipy.special import expit, logsumexp
from scipy.stats import ncx2, norm

from .data import Dataset
from .errors import InvalidInputError
from .rng import substream

_QUAD_SD_CUTOFF = 10.0  # standardized integration window; tail folded into error


def _validate_cov(cov: np.ndarray, what: str) -> np.ndarray:
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidInputError(f"{what} must be a square matrix")
    if not np.all(np.isfinite(cov)):
        raise InvalidInputError(f"{what} has non-finite entries")
    if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-12):
        raise InvalidInputError(f"{what} must be symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError(f"{what} must be positive definite") from exc
    return cov


@dataclass(frozen=True)
class LogisticGaussianSpec:
    """X ~ N(mean, cov); P(Y = first label | X = x) = sigmoid((w, x) + b).

    Label ids are {0, 1}, displayed as names ("1", "2").
    """

    mean: np.ndarray
    cov: np.ndarray
    weights: np.ndarray
    intercept: float

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        cov = _validate_cov(np.atleast_2d(self.cov), "covariance")
        if mean.shape != weights.shape or cov.shape[0] != mean.shape[0]:
            raise InvalidInputError("mean, weights and covariance dimensions disagree")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(weights))
                and np.isfinite(self.intercept)):
            raise InvalidInputError("spec parameters must be finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def m(self) -> int:
        return 2

    @property
    def label_names(self) -> tuple[str, ...]:
        return ("1", "2")


@dataclass(frozen=True)
class ClassGaussianSpec:
    """Y ~ priors; X | Y = y ~ N(means[y], covs[y])."""

    priors: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=np.float64)
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        covs = np.asarray(self.covs, dtype=np.float64)
        if covs.ndim == 2:
            covs = covs[None, :, :].repeat(len(priors), axis=0)
        if priors.ndim != 1 or len(priors) < 2:
            raise InvalidInputError("need a prior vector over at least 2 classes")
        if np.any(priors <= 0) or abs(priors.sum() - 1.0) > 1e-12:
            raise InvalidInputError("priors must be strictly positive and sum to 1")
        if means.shape[0] != len(priors) or covs.shape[0] != len(priors):
            raise InvalidInputError("per-class means/covs must match the prior length")
        for y in range(len(priors)):
            _validate_cov(covs[y], f"covariance of class {y}")
        if not np.all(np.isfinite(means)):
            raise InvalidInputError("means must be finite")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def m(self) -> int:
        return len(self.priors)

    @property
    def label_names(self) -> tuple[str, ...]:
        return tuple(str(y) for y in range(self.m))


ModelSpec = LogisticGaussianSpec | ClassGaussianSpec


@dataclass(frozen=True)
class GroundTruth:
    value: float
    method: str           # "quadrature" | "monte-carlo" | "closed-form"
    error_bound: float
    evaluations: int


@dataclass(frozen=True)
class ProbabilityEstimate:
    value: float
    method: str
    error_bound: float
    evaluations: int


def binary_entropy_from_logit(t):
    """Entropy of Bernoulli(sigmoid(t)), numerically stable in t."""
    t = np.asarray(t, dtype=np.float64)
    p = expit(t)
    return p * np.logaddexp(0.0, -t) + (1.0 - p) * np.logaddexp(0.0, t)


# ---------------------------------------------------------------------------
# sampling

def sample_joint(spec: ModelSpec, n: int, rng: np.random.Generator):
    """n i.i.d. draws of (X, Y) from the model, as (features, label ids)."""
    if n < 1:
        raise InvalidInputError(f"need n >= 1, got {n}")
    if isinstance(spec, LogisticGaussianSpec):
        chol = np.linalg.cholesky(spec.cov)
        x = spec.mean + rng.standard_normal((n, spec.d)) @ chol.T
        p1 = expit(x @ spec.weights + spec.intercept)
        y = (rng.random(n) >= p1).astype(np.intp)
        return x, y
    cum = np.cumsum(spec.priors)
    y = np.searchsorted(cum, rng.random(n), side="right").astype(np.intp)
    y = np.minimum(y, spec.m - 1)
    z = rng.standard_normal((n, spec.d))
    x = np.empty((n, spec.d))
    for cls in range(spec.m):
        mask = y == cls
        if np.any(mask):
            chol = np.linalg.cholesky(spec.covs[cls])
            x[mask] = spec.means[cls] + z[mask] @ chol.T
    return x, y


def sample(spec: ModelSpec, n: int, seed: int) -> Dataset:
    """Reproducible dataset of n draws; identical (spec, n, seed) give
    bit-identical output."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2, got {n}")
    x, y = sample_joint(spec, n, substream(seed, "sample"))
    return Dataset(features=x, labels=y, m=spec.m, label_names=spec.label_names)


def sample_features(spec: ModelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    return sample_joint(spec, n, rng)[0]


# ---------------------------------------------------------------------------
# densities and posteriors

def _gaussian_logpdf(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    diff = np.atleast_2d(x) - mean
    sol = solve_triangular(chol, diff.T, lower=True).T
    quad = np.sum(sol * sol, axis=1)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    d = mean.shape[0]
    return -0.5 * (quad + logdet + d * math.log(2.0 * math.pi))


def feature_log_density(spec: ModelSpec, x) -> np.ndarray:
    """log f_X at one or many points (rows)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if isinstance(spec, LogisticGaussianSpec):
        return _gaussian_logpdf(x, spec.mean, spec.cov)
    parts = np.stack([np.log(spec.priors[y]) + _gaussian_logpdf(x, spec.means[y], spec.covs[y])
                      for y in range(spec.m)], axis=0)
    return logsumexp(parts, axis=0)


def posterior_many(spec: ModelSpec, x) -> np.ndarray:
    """Conditional label law f_{Y|X}(. | x) for rows of x, shape (n, m)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("points must be finite")
    if isinstance(spec, LogisticGaussianSpec):
        p1 = expit(x @ spec.weights + spec.intercept)
        return np.stack([p1, 1.0 - p1], axis=1)
    logits = np.stack([np.log(spec.priors[y]) + _gaussian_logpdf(x, spec.means[y], spec.covs[y])
                       for y in range(spec.m)], axis=1)
    logits -= logsumexp(logits, axis=1, keepdims=True)
    return np.exp(logits)


def posterior(spec: ModelSpec, x) -> np.ndarray:
    """Posterior probability vector over the label alphabet at a point."""
    return posterior_many(spec, x)[0]


# ---------------------------------------------------------------------------
# ground truth

def true_conditional_entropy(spec: ModelSpec, tolerance: float = 1e-8,
                             seed: int = 0, max_draws: int = 1 << 23) -> GroundTruth:
    """Numeric H(Y|X) for a model spec.

    Logistic family: the posterior depends on x only through the scalar
    T = (w, x) + b, which is Gaussian, so the entropy reduces to a 1-d
    integral evaluated by adaptive quadrature.  Class-Gaussian family:
    Monte Carlo average of the posterior entropy with reported standard
    error.
    """
    if tolerance <= 0:
        raise InvalidInputError(f"tolerance must be positive, got {tolerance}")
    if isinstance(spec, LogisticGaussianSpec):
        loc = float(spec.weights @ spec.mean + spec.intercept)
        var = float(spec.weights @ spec.cov @ spec.weights)
        if var <= 0.0:
            value = float(binary_entropy_from_logit(loc))
            return GroundTruth(value=value, method="closed-form",
                               error_bound=4.0 * np.finfo(float).eps, evaluations=1)
        sd = math.sqrt(var)

        def integrand(u):
            return norm.pdf(u) * binary_entropy_from_logit(loc + sd * u)

        value, err, info = integrate.quad(integrand, -_QUAD_SD_CUTOFF, _QUAD_SD_CUTOFF,
                                          epsabs=0.5 * tolerance, epsrel=0.0,
                                          limit=200, full_output=True)[:3]
        tail = 2.0 * norm.sf(_QUAD_SD_CUTOFF) * math.log(2.0)
        return GroundTruth(value=float(value), method="quadrature",
                           error_bound=float(err + tail),
                           evaluations=int(info["neval"]))

    rng = substream(seed, "ground-truth")
    total = 0
    mean = 0.0
    msq = 0.0
    batch = 1 << 16
    while True:
        x = sample_features(spec, batch, rng)
        probs = posterior_many(spec, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = np.where(probs > 0.0, np.log(probs), 0.0)
        ent = -(probs * logp).sum(axis=1)
        # Chan et al. parallel-variance merge of the new batch
        chunk_mean = float(ent.mean())
        chunk_msq = float(((ent - chunk_mean) ** 2).sum())
        delta = chunk_mean - mean
        new_total = total + len(ent)
        mean += delta * len(ent) / new_total
        msq += chunk_msq + delta * delta * total * len(ent) / new_total
        total = new_total
        se = math.sqrt(msq / (total - 1) / total)
        if 1.96 * se <= tolerance or total >= max_draws:
            return GroundTruth(value=mean, method="monte-carlo",
                               error_bound=1.96 * se, evaluations=total)


# ---------------------------------------------------------------------------
# ball / sphere conditional label probabilities (oracles for the lemma lab)

def _check_radius(t: float) -> float:
    if not (np.isfinite(t) and t > 0):
        raise InvalidInputError(f"radius must be positive and finite, got {t}")
    return float(t)


def _check_label(spec: ModelSpec, y: int) -> int:
    if not 0 <= y < spec.m:
        raise InvalidInputError(f"label id {y} out of range [0, {spec.m})")
    return int(y)


def ball_label_probability(spec: ModelSpec, x, y: int, t: float,
                           tolerance: float = 1e-3, seed: int = 0) -> ProbabilityEstimate:
    """P(Y = y | X in closed ball B(x, t)).

    d = 1 uses quadrature over the interval; higher dimensions use
    rejection sampling with the reported standard error.
    """
    t = _check_radius(t)
    y = _check_label(spec, y)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if spec.d == 1:
        x0 = float(x[0])

        def num(u):
            pt = np.array([[u]])
            return float(posterior_many(spec, pt)[0, y]) * math.exp(float(feature_log_density(spec, pt)[0]))

        def den(u):
            return math.exp(float(feature_log_density(spec, np.array([[u]]))[0]))

        nv, ne = integrate.quad(num, x0 - t, x0 + t, epsabs=1e-12, epsrel=1e-10, limit=200)
        dv, de = integrate.quad(den, x0 - t, x0 + t, epsabs=1e-12, epsrel=1e-10, limit=200)
        if dv <= 0.0:
            raise InvalidInputError("feature mass of the ball is numerically zero")
        value = nv / dv
        err = (ne + abs(value) * de) / dv
        return ProbabilityEstimate(value=float(value), method="quadrature",
                                   error_bound=float(max(err, 1e-15)), evaluations=0)

    rng = substream(seed, "ball-prob")
    accepted: list[np.ndarray] = []
    count = 0
    draws = 0
    target = max(2000, int(0.25 / tolerance ** 2))
    while count < target and draws < 20_000_000:
        xs = sample_features(spec, 1 << 17, rng)
        draws += xs.shape[0]
        inside = np.sqrt(((xs - x) ** 2).sum(axis=1)) <= t
        if np.any(inside):
            accepted.append(posterior_many(spec, xs[inside])[:, y])
            count += int(inside.sum())
    if count < 100:
        raise InvalidInputError(
            f"ball B(x, {t}) too improbable: only {count} of {draws} draws landed inside")
    vals = np.concatenate(accepted)
    value = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 1.0
    return ProbabilityEstimate(value=value, method="monte-carlo",
                               error_bound=max(se, 1e-15), evaluations=draws)


def sphere_label_probability(spec: ModelSpec, x, y: int, t: float,
                             tolerance: float = 1e-3, seed: int = 0) -> ProbabilityEstimate:
    """P(Y = y | ||X - x|| = t), the complement of the mixture weight alpha.

    d = 1 is the exact two-point average weighted by the feature density;
    higher dimensions average the posterior against the density over
    random sphere directions.
    """
    t = _check_radius(t)
    y = _check_label(spec, y)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if spec.d == 1:
        pts = np.array([[x[0] + t], [x[0] - t]])
        dens = np.exp(feature_log_density(spec, pts))
        post = posterior_many(spec, pts)[:, y]
        total = dens.sum()
        if total <= 0.0:
            raise InvalidInputError("feature density vanishes on the sphere")
        value = float((post * dens).sum() / total)
        return ProbabilityEstimate(value=value, method="closed-form",
                                   error_bound=4.0 * np.finfo(float).eps, evaluations=2)

    rng = substream(seed, "sphere-prob")
    num = 0.0
    den = 0.0
    sq_num = []
    total_draws = 0
    while total_draws < 2_000_000:
        u = rng.standard_normal((1 << 15, spec.d))
        u /= np.sqrt((u * u).sum(axis=1, keepdims=True))
        pts = x + t * u
        w = np.exp(feature_log_density(spec, pts))
        p = posterior_many(spec, pts)[:, y]
        num += float((w * p).sum())
        den += float(w.sum())
        sq_num.append((w, p))
        total_draws += u.shape[0]
        if den > 0:
            value = num / den
            # delta-method standard error for the ratio estimator
            w_all = np.concatenate([a for a, _ in sq_num])
            p_all = np.concatenate([b for _, b in sq_num])
            resid = w_all * (p_all - value)
            se = float(np.sqrt(resid.var(ddof=1) / total_draws) / (den / total_draws))
            if se <= tolerance:
                return ProbabilityEstimate(value=float(value), method="monte-carlo",
                                           error_bound=max(se, 1e-15),
                                           evaluations=total_draws)
    if den <= 0:
        raise InvalidInputError("feature density vanishes on the sampled sphere")
    return ProbabilityEstimate(value=float(num / den), method="monte-carlo",
                               error_bound=max(se, 1e-15), evaluations=total_draws)


# ---------------------------------------------------------------------------
# analytic distance law of ||X - x||

def feature_distance_law(spec: ModelSpec, x):
    """(cdf, pdf) callables for the distance ||X - x||, when analytic.

    Available for d = 1 (any covariances) and for isotropic covariances
    (sigma^2 * I shared across classes) via the noncentral chi-square law.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if spec.d == 1:
        if isinstance(spec, LogisticGaussianSpec):
            comps = [(1.0, float(spec.mean[0]), math.sqrt(float(spec.cov[0, 0])))]
        else:
            comps = [(float(spec.priors[y]), float(spec.means[y, 0]),
                      math.sqrt(float(spec.covs[y, 0, 0]))) for y in range(spec.m)]
        x0 = float(x[0])

        def cdf(t):
            t = np.asarray(t, dtype=np.float64)
            acc = sum(w * (norm.cdf((x0 + t - mu) / sd) - norm.cdf((x0 - t - mu) / sd))
                      for w, mu, sd in comps)
            return np.where(t > 0, acc, 0.0)

        def pdf(t):
            t = np.asarray(t, dtype=np.float64)
            acc = sum(w * (norm.pdf((x0 + t - mu) / sd) + norm.pdf((x0 - t - mu) / sd)) / sd
                      for w, mu, sd in comps)
            return np.where(t > 0, acc, 0.0)

        return cdf, pdf

    if isinstance(spec, LogisticGaussianSpec):
        covs = spec.cov[None]
        means = spec.mean[None]
        weights = np.array([1.0])
    else:
        covs = spec.covs
        means = spec.means
        weights = spec.priors
    sigmas = []
    for cov in covs:
        sig2 = cov[0, 0]
        if not np.allclose(cov, sig2 * np.eye(spec.d), rtol=1e-12, atol=1e-12):
            raise InvalidInputError(
                "analytic distance law needs d = 1 or isotropic covariances")
        sigmas.append(float(sig2))
    lambdas = [float(((means[j] - x) ** 2).sum() / sigmas[j]) for j in range(len(weights))]

    def cdf(t):
        t = np.asarray(t, dtype=np.float64)
        acc = sum(w * ncx2.cdf(np.square(t) / s2, df=spec.d, nc=lam)
                  for w, s2, lam in zip(weights, sigmas, lambdas))
        return np.where(t > 0, acc, 0.0)

    def pdf(t):
        t = np.asarray(t, dtype=np.float64)
        acc = sum(w * 2.0 * t / s2 * ncx2.pdf(np.square(t) / s2, df=spec.d, nc=lam)
                  for w, s2, lam in zip(weights, sigmas, lambdas))
        return np.where(t > 0, acc, 0.0)

    return cdf, pdf


# ---------------------------------------------------------------------------
# JSON round trip

_SCHEMA = "condent-model/1"


def spec_to_dict(spec: ModelSpec) -> dict:
    if isinstance(spec, LogisticGaussianSpec):
        return {"schema": _SCHEMA, "model": "logistic-gaussian",
                "mean": spec.mean.tolist(), "cov": spec.cov.tolist(),
                "weights": spec.weights.tolist(), "intercept": spec.intercept}
    return {"schema": _SCHEMA, "model": "class-gaussian",
            "priors": spec.priors.tolist(), "means": spec.means.tolist(),
            "covs": spec.covs.tolist()}


def spec_from_dict(doc: dict) -> ModelSpec:
    if not isinstance(doc, dict):
        raise InvalidInputError("model document must be a JSON object")
    if doc.get("schema") != _SCHEMA:
        raise InvalidInputError(f"model document must declare schema {_SCHEMA!r}")
    kind = doc.get("model")
    if kind == "logistic-gaussian":
        allowed = {"schema", "model", "mean", "cov", "weights", "intercept"}
        unknown = set(doc) - allowed
        if unknown:
            raise InvalidInputError(f"unknown model keys: {sorted(unknown)}")
        try:
            return LogisticGaussianSpec(mean=doc["mean"], cov=doc["cov"],
                                        weights=doc["weights"],
                                        intercept=doc["intercept"])
        except KeyError as exc:
            raise InvalidInputError(f"missing model key {exc}") from exc
    if kind == "class-gaussian":
        allowed = {"schema", "model", "priors", "means", "covs"}
        unknown = set(doc) - allowed
        if unknown:
            raise InvalidInputError(f"unknown model keys: {sorted(unknown)}")
        try:
            return ClassGaussianSpec(priors=doc["priors"], means=doc["means"],
                                     covs=doc["covs"])
        except KeyError as exc:
            raise InvalidInputError(f"missing model key {exc}") from exc
    raise InvalidInputError(f"unknown model kind {kind!r}")
