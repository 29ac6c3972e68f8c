import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from condent.errors import InconclusiveError, InvalidInputError
from condent.lemma_lab import (conditional_xi_law, knn_distance_density,
                               median_radius, order_statistic_density_weight,
                               radius_cdf, radius_density_sum,
                               verify_conditional_law,
                               verify_distance_distribution)
from condent.models import LogisticGaussianSpec, feature_distance_law


def null_spec(d=1):
    return LogisticGaussianSpec(mean=np.zeros(d), cov=np.eye(d),
                                weights=np.zeros(d), intercept=0.0)


def exact_density_sum(n, k, p):
    """Literal term-by-term bracket sum in exact rational arithmetic."""
    p = Fraction(p)
    q = 1 - p
    total = Fraction(0)
    for j in range(k, n):
        t1 = j * p ** (j - 1) * q ** (n - 1 - j)
        t2 = (n - j - 1) * p ** j * (q ** (n - j - 2) if n - j - 2 >= 0 else 0)
        total += math.comb(n - 1, j) * (t1 - t2)
    return total


def test_xi_law_small_cases():
    np.testing.assert_allclose(conditional_xi_law(1, 0.3, 0.4).pmf, [0.4, 0.6])
    np.testing.assert_allclose(conditional_xi_law(2, 0.5, 0.5).pmf,
                               [0.25, 0.5, 0.25])
    with pytest.raises(InvalidInputError):
        conditional_xi_law(0, 0.5, 0.5)
    with pytest.raises(InvalidInputError):
        conditional_xi_law(2, 1.5, 0.5)


def test_xi_law_normalization_grid():
    for k in range(1, 7):
        for p in np.linspace(0.0, 1.0, 10):
            for alpha in np.linspace(0.0, 1.0, 10):
                pmf = conditional_xi_law(k, p, alpha).pmf
                assert np.all(pmf >= 0.0)
                assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


def test_xi_law_degenerate_mixture_weights():
    from scipy.stats import binom
    k, p = 5, 0.37
    r = np.arange(k + 1)
    np.testing.assert_allclose(conditional_xi_law(k, p, 1.0).pmf,
                               binom.pmf(r, k - 1, p), atol=1e-15)
    np.testing.assert_allclose(conditional_xi_law(k, p, 0.0).pmf,
                               binom.pmf(r - 1, k - 1, p), atol=1e-15)


def test_density_sum_matches_closed_form_float():
    # the literal sum cancels catastrophically deep in the tails (its terms
    # are O(1) while the result is astronomically small), so the float
    # routes are compared with an absolute-plus-relative tolerance; the
    # exact algebraic identity is covered by the rational-arithmetic test
    p = np.linspace(0.02, 0.9, 45)
    for n in (2, 5, 10, 30, 50):
        for k in range(1, n):
            a = radius_density_sum(n, k, p)
            b = order_statistic_density_weight(n, k, p)
            assert np.all(np.abs(a - b) <= 1e-12 + 1e-9 * np.abs(b)), (n, k)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 50), data=st.data(),
       num=st.integers(1, 999))
def test_density_sum_telescopes_exactly(n, data, num):
    # exact rational literal sum vs the library's closed form, 1e-10 relative
    k = data.draw(st.integers(1, n - 1))
    p = Fraction(num, 1000)
    exact = exact_density_sum(n, k, p)
    want = Fraction(k * math.comb(n - 1, k)) * p ** (k - 1) * (1 - p) ** (n - 1 - k)
    assert exact == want  # the telescoping identity, exactly
    closed = order_statistic_density_weight(n, k, float(p))
    if want > 0:
        assert abs(closed / float(want) - 1.0) < 1e-10


def test_knn_density_trivial_single_neighbor():
    cdf, pdf = feature_distance_law(null_spec(), np.zeros(1))
    for u in (0.1, 0.5, 2.0):
        assert knn_distance_density(cdf, pdf, 2, 1, u) == pytest.approx(
            float(pdf(u)), rel=1e-12)


def test_knn_density_integrates_to_one():
    cdf, pdf = feature_distance_law(null_spec(), np.zeros(1))
    for n, k in ((50, 5), (20, 1), (10, 9)):
        mass, err = integrate.quad(
            lambda u: float(knn_distance_density(cdf, pdf, n, k, u)),
            0.0, np.inf, limit=200)
        assert mass == pytest.approx(1.0, abs=1e-6)


def test_radius_cdf_limits():
    cdf_p, _ = feature_distance_law(null_spec(), np.zeros(1))
    cdf = radius_cdf(cdf_p, 50, 5)
    assert float(cdf(1e9)) == pytest.approx(1.0, abs=1e-12)
    assert float(cdf(1e-9)) == pytest.approx(0.0, abs=1e-12)


def test_median_radius_is_analytic_median():
    spec = null_spec()
    t = median_radius(spec, np.zeros(1), 50, 5)
    cdf_p, _ = feature_distance_law(spec, np.zeros(1))
    assert float(radius_cdf(cdf_p, 50, 5)(t)) == pytest.approx(0.5, abs=1e-9)


def test_verify_conditional_law_null_model():
    spec = null_spec()
    t = median_radius(spec, np.zeros(1), 50, 3)
    rep = verify_conditional_law(spec, np.zeros(1), 0, 50, 3, t, t / 10,
                                 30_000, seed=6, p=0.5, alpha=0.5)
    assert rep.replicates_used >= 500
    assert rep.tv_distance <= 0.05
    assert rep.acceptance
    assert rep.empirical_pmf.sum() == pytest.approx(1.0, abs=1e-12)


def test_verify_conditional_law_shrinking_shells():
    # TV does not grow as the shell narrows (hit counts held comparable)
    spec = null_spec()
    t = median_radius(spec, np.zeros(1), 50, 3)
    wide = verify_conditional_law(spec, np.zeros(1), 0, 50, 3, t, t / 5,
                                  40_000, seed=6, p=0.5, alpha=0.5)
    narrow = verify_conditional_law(spec, np.zeros(1), 0, 50, 3, t, t / 10,
                                    80_000, seed=6, p=0.5, alpha=0.5)
    assert narrow.tv_distance <= wide.tv_distance + 0.01


def test_verify_conditional_law_inconclusive():
    spec = null_spec()
    t = median_radius(spec, np.zeros(1), 50, 3)
    with pytest.raises(InconclusiveError) as exc:
        verify_conditional_law(spec, np.zeros(1), 0, 50, 3, t, t / 10,
                               300, seed=6, p=0.5, alpha=0.5)
    assert exc.value.hits < 500


def test_verify_conditional_law_validation():
    spec = null_spec()
    with pytest.raises(InvalidInputError):
        verify_conditional_law(spec, np.zeros(1), 0, 50, 3, 0.5, 0.6, 100, 0)
    with pytest.raises(InvalidInputError):
        verify_conditional_law(spec, np.zeros(1), 0, 50, 60, 0.5, 0.05, 100, 0)


def test_verify_distance_distribution():
    rep = verify_distance_distribution(null_spec(), np.zeros(1), 50, 5,
                                       5000, seed=8)
    assert rep.within_band
    assert rep.band95 == pytest.approx(1.36 / math.sqrt(5000))


def test_verify_distance_distribution_single_neighbor():
    # n=2, k=1: the radius is one plain distance, CDF is the distance law
    rep = verify_distance_distribution(null_spec(), np.zeros(1), 2, 1,
                                       5000, seed=8)
    assert rep.within_band
