import math

import numpy as np
import pytest

from condent.errors import InvalidInputError
from condent.models import (ClassGaussianSpec, LogisticGaussianSpec,
                            ball_label_probability, binary_entropy_from_logit,
                            feature_distance_law, feature_log_density,
                            posterior, posterior_many, sample, sample_joint,
                            spec_from_dict, spec_to_dict,
                            sphere_label_probability, true_conditional_entropy)
from condent.rng import substream


def logistic_1d(w=4.0, b=0.0):
    return LogisticGaussianSpec(mean=np.zeros(1), cov=np.eye(1),
                                weights=np.array([w]), intercept=b)


@pytest.fixture
def class_spec():
    return ClassGaussianSpec(priors=np.array([0.7, 0.3]),
                             means=np.array([[0.0, 0.0], [2.0, 1.0]]),
                             covs=np.array([np.eye(2), 0.5 * np.eye(2)]))


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        LogisticGaussianSpec(mean=np.zeros(2), cov=np.eye(2),
                             weights=np.zeros(3), intercept=0.0)
    with pytest.raises(InvalidInputError):
        ClassGaussianSpec(priors=np.array([0.5, 0.6]),
                          means=np.zeros((2, 1)), covs=np.ones((2, 1, 1)))
    with pytest.raises(InvalidInputError):
        ClassGaussianSpec(priors=np.array([0.5, 0.5]),
                          means=np.zeros((2, 1)),
                          covs=np.array([[[-1.0]], [[1.0]]]))


def test_sample_determinism():
    spec = logistic_1d()
    a = sample(spec, 100, seed=9)
    b = sample(spec, 100, seed=9)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    c = sample(spec, 100, seed=10)
    assert not np.array_equal(a.features, c.features)


def test_sample_independence_null_frequency():
    ds = sample(logistic_1d(w=0.0), 10_000, seed=1)
    freq = (ds.labels == 0).mean()  # label id 0 is "1", the sigmoid class
    assert abs(freq - 0.5) <= 3 * 0.5 / math.sqrt(10_000)


def test_sample_class_gaussian_moments(class_spec):
    x, y = sample_joint(class_spec, 10_000, substream(4, "t"))
    for cls, prior in enumerate(class_spec.priors):
        freq = (y == cls).mean()
        assert abs(freq - prior) <= 3 * math.sqrt(prior * (1 - prior) / 10_000)
        mu = x[y == cls].mean(axis=0)
        sd = math.sqrt(class_spec.covs[cls][0, 0] / (y == cls).sum())
        np.testing.assert_allclose(mu, class_spec.means[cls], atol=3.5 * sd)


def test_posterior_normalization(class_spec):
    pts = np.array([[0.0, 0.0], [1e6, -1e6], [-50.0, 3.0]])
    probs = posterior_many(class_spec, pts)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(probs >= 0.0)
    p = posterior(logistic_1d(), np.array([1e6]))
    np.testing.assert_allclose(p.sum(), 1.0, atol=1e-12)


def test_binary_entropy_from_logit():
    assert binary_entropy_from_logit(0.0) == pytest.approx(math.log(2), abs=1e-15)
    assert binary_entropy_from_logit(50.0) == pytest.approx(0.0, abs=1e-15)
    b = math.log(3.0)  # sigmoid -> 0.75
    want = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert binary_entropy_from_logit(b) == pytest.approx(want, abs=1e-12)


def test_ground_truth_independent_case():
    gt = true_conditional_entropy(logistic_1d(w=0.0))
    assert gt.value == pytest.approx(math.log(2), abs=1e-8)
    gt2 = true_conditional_entropy(
        LogisticGaussianSpec(mean=np.zeros(1), cov=np.eye(1),
                             weights=np.zeros(1), intercept=math.log(3.0)))
    want = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert gt2.value == pytest.approx(want, abs=1e-8)


def test_ground_truth_frozen_reference():
    # frozen dual-method constant for w=4, b=0, standard normal feature;
    # cross-checked once against a 10^7-draw Monte Carlo run
    gt = true_conditional_entropy(logistic_1d())
    assert gt.method == "quadrature"
    assert gt.value == pytest.approx(0.2908516838205464, abs=1e-9)


def test_ground_truth_in_range(class_spec):
    gt = true_conditional_entropy(class_spec, tolerance=5e-3)
    assert 0.0 <= gt.value <= math.log(class_spec.m)
    assert gt.error_bound <= 5e-3


def test_logistic_reduction_vs_full_mc():
    spec = LogisticGaussianSpec(mean=np.array([0.5, -0.2, 0.0]),
                                cov=np.diag([1.0, 2.0, 0.5]),
                                weights=np.array([1.0, -1.0, 0.5]),
                                intercept=0.3)
    gt = true_conditional_entropy(spec)
    rng = substream(77, "mc-check")
    x, _ = sample_joint(spec, 400_000, rng)
    ent = binary_entropy_from_logit(x @ spec.weights + spec.intercept)
    se = ent.std(ddof=1) / math.sqrt(len(ent))
    assert abs(ent.mean() - gt.value) <= 3 * se


def test_ball_probability_shrinks_to_posterior():
    spec = logistic_1d()
    x = np.array([0.5])
    target = posterior(spec, x)[0]
    errs = [abs(ball_label_probability(spec, x, 0, t).value - target)
            for t in (0.1, 0.01, 0.001)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_ball_probability_frozen_reference():
    # frozen quadrature value, cross-checked against 5*10^7-draw rejection MC
    est = ball_label_probability(logistic_1d(), np.array([0.5]), 0, 0.25)
    assert est.value == pytest.approx(0.8632630377572289, abs=1e-9)


def test_sphere_probability_1d_closed_form():
    spec = logistic_1d()
    est = sphere_label_probability(spec, np.array([0.5]), 0, 0.25)
    # two-point density-weighted average at x +- t
    phi = lambda u: math.exp(-u * u / 2) / math.sqrt(2 * math.pi)
    sig = lambda u: 1.0 / (1.0 + math.exp(-4.0 * u))
    want = ((phi(0.75) * sig(0.75) + phi(0.25) * sig(0.25))
            / (phi(0.75) + phi(0.25)))
    assert est.value == pytest.approx(want, abs=1e-12)


def test_ball_and_sphere_monte_carlo_2d(class_spec):
    x = np.array([0.5, 0.2])
    ball = ball_label_probability(class_spec, x, 0, 0.5, tolerance=5e-3)
    sph = sphere_label_probability(class_spec, x, 0, 0.5, tolerance=5e-3)
    target = posterior(class_spec, x)[0]
    assert abs(ball.value - target) < 0.05
    assert abs(sph.value - target) < 0.05
    assert ball.method == sph.method == "monte-carlo"


def test_feature_distance_law_1d():
    spec = logistic_1d()
    cdf, pdf = feature_distance_law(spec, np.array([0.5]))
    assert cdf(0.0) == 0.0
    assert cdf(100.0) == pytest.approx(1.0, abs=1e-12)
    # numeric derivative of the CDF matches the density
    t = 0.7
    h = 1e-6
    assert (cdf(t + h) - cdf(t - h)) / (2 * h) == pytest.approx(pdf(t), rel=1e-5)


def test_feature_distance_law_isotropic(class_spec):
    iso = ClassGaussianSpec(priors=np.array([0.5, 0.5]),
                            means=np.array([[0.0, 0.0], [1.0, 1.0]]),
                            covs=np.array([np.eye(2), np.eye(2)]))
    cdf, _ = feature_distance_law(iso, np.zeros(2))
    rng = substream(5, "dist-check")
    x, _ = sample_joint(iso, 200_000, rng)
    r = np.sqrt((x * x).sum(axis=1))
    for t in (0.5, 1.0, 2.0):
        emp = (r <= t).mean()
        assert abs(emp - float(cdf(t))) < 0.005
    aniso = ClassGaussianSpec(priors=np.array([0.5, 0.5]),
                              means=np.zeros((2, 2)),
                              covs=np.array([np.diag([1.0, 2.0]), np.eye(2)]))
    with pytest.raises(InvalidInputError):
        feature_distance_law(aniso, np.zeros(2))


def test_density_integrates_to_one():
    spec = logistic_1d()
    logf = feature_log_density(spec, np.linspace(-8, 8, 2001)[:, None])
    mass = np.trapezoid(np.exp(logf), dx=16 / 2000)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_spec_json_round_trip(class_spec):
    for spec in (logistic_1d(w=2.5, b=-0.3), class_spec):
        doc = spec_to_dict(spec)
        back = spec_from_dict(doc)
        assert type(back) is type(spec)
        assert spec_to_dict(back) == doc
    with pytest.raises(InvalidInputError):
        spec_from_dict({"schema": "condent-model/1", "family": "bogus"})
    doc = spec_to_dict(logistic_1d())
    doc["extra"] = 1
    with pytest.raises(InvalidInputError):
        spec_from_dict(doc)
