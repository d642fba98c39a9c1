"""
Tests for the normal mixture, importance weights and entropy flattening
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from krigmix.core.errors import DegenerateSampleError
from krigmix.sampling.mixture import (
    NormalMixture,
    WeightedSample,
    entropy,
    flatten_weights,
    mixture_log_density,
    mixture_moments,
    mixture_sample,
    weighted_covariance,
)


def _two_bumps(weights=(0.5, 0.5), offset=1.0):
    return NormalMixture(
        means=[[-offset], [offset]],
        factors=[[[1.0]], [[1.0]]],
        weights=weights,
    )


def test_standard_normal_density_at_mode():
    mix = NormalMixture(means=[[0.0, 0.0]], factors=[np.eye(2)], weights=[1.0])
    assert mixture_log_density(mix, [0.0, 0.0]) == pytest.approx(-math.log(2 * math.pi), rel=1e-12)


def test_symmetric_mixture_density():
    mix = _two_bumps()
    for x in (0.3, 1.7, 4.0):
        assert mixture_log_density(mix, [x]) == pytest.approx(mixture_log_density(mix, [-x]), rel=1e-12)


def test_density_matches_direct_sum():
    rng = np.random.default_rng(4)
    covariances = []
    for _ in range(3):
        A = rng.normal(size=(2, 2))
        covariances.append(A @ A.T + 0.5 * np.eye(2))
    means = rng.normal(size=(3, 2))
    weights = np.array([0.2, 0.5, 0.3])
    mix = NormalMixture.from_covariances(means, covariances, weights)
    points = rng.normal(size=(7, 2))
    expected = np.log(
        sum(w * stats.multivariate_normal(m, c).pdf(points) for w, m, c in zip(weights, means, covariances))
    )
    np.testing.assert_allclose(mixture_log_density(mix, points), expected, rtol=1e-10)


def test_density_independent_of_worker_count():
    rng = np.random.default_rng(6)
    n = 70
    mix = NormalMixture(
        means=rng.normal(size=(n, 3)),
        factors=np.broadcast_to(0.7 * np.eye(3), (n, 3, 3)),
        weights=np.full(n, 1.0 / n),
    )
    points = rng.normal(size=(11, 3))
    single = mixture_log_density(mix, points, workers=1)
    many = mixture_log_density(mix, points, workers=4)
    np.testing.assert_array_equal(single, many)


def test_zero_weight_component_ignored():
    mix = _two_bumps(weights=(1.0, 0.0))
    expected = stats.norm(-1.0, 1.0).logpdf(0.4)
    assert mixture_log_density(mix, [0.4]) == pytest.approx(expected, rel=1e-12)


def test_invalid_weights_rejected():
    with pytest.raises(ValidationError):
        _two_bumps(weights=(0.6, 0.6))
    with pytest.raises(ValidationError):
        _two_bumps(weights=(1.2, -0.2))


def test_mixture_is_immutable():
    mix = _two_bumps()
    with pytest.raises(ValueError):
        mix.means[0, 0] = 5.0


def test_sampling_degenerate_factor_returns_mean():
    mix = NormalMixture(means=[[1.0, -2.0]], factors=[1e-12 * np.eye(2)], weights=[1.0])
    draws = mixture_sample(mix, 50, np.random.default_rng(0))
    np.testing.assert_allclose(draws, np.tile([1.0, -2.0], (50, 1)), atol=1e-9)


def test_sample_mean_matches_moments():
    mix = NormalMixture.from_covariances(
        [[0.0, 1.0], [3.0, -1.0]],
        [np.eye(2), [[2.0, 0.5], [0.5, 1.0]]],
        [0.25, 0.75],
    )
    count = 20000
    draws = mixture_sample(mix, count, np.random.default_rng(1))
    mean, cov = mixture_moments(mix)
    se = np.sqrt(np.diag(cov) / count)
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 4 * se)


def test_component_frequencies_follow_weights():
    mix = _two_bumps(weights=(0.3, 0.7), offset=50.0)
    count = 10000
    draws = mixture_sample(mix, count, np.random.default_rng(2))
    share = float(np.mean(draws[:, 0] > 0))
    assert abs(share - 0.7) < 4 * math.sqrt(0.21 / count)


def test_mixture_moments():
    mean, cov = mixture_moments(_two_bumps())
    np.testing.assert_allclose(mean, [0.0], atol=1e-15)
    np.testing.assert_allclose(cov, [[2.0]], rtol=1e-12)


def test_entropy_examples():
    assert entropy(np.full(8, 0.125)) == pytest.approx(1.0, rel=1e-12)
    assert entropy([1.0, 0.0, 0.0]) == 0.0
    assert entropy([1.0]) == 1.0
    assert entropy([0.9, 0.1]) == pytest.approx(0.4690, abs=1e-4)


def test_flatten_weights_examples():
    v, gamma = flatten_weights([0.9, 0.1])
    assert gamma == pytest.approx(0.4690, abs=1e-4)
    np.testing.assert_allclose(v, [0.7370, 0.2630], atol=1e-3)
    v, gamma = flatten_weights(np.full(4, 0.25))
    np.testing.assert_allclose(v, np.full(4, 0.25), rtol=1e-12)
    v, gamma = flatten_weights([0.0, 1.0, 0.0, 0.0])
    assert gamma == 0.0
    np.testing.assert_allclose(v, np.full(4, 0.25), rtol=1e-15)
    v, gamma = flatten_weights([0.5, 0.5, 0.0])
    assert v[2] == 0.0


def test_entropy_range_and_mixing_towards_uniform():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        w = rng.dirichlet(np.full(n, rng.uniform(0.05, 2.0)))
        gamma = entropy(w)
        assert 0.0 <= gamma <= 1.0
        mixed = 0.5 * w + 0.5 / n
        assert entropy(mixed) >= gamma - 1e-12


def test_flattening_keeps_order_and_lifts_small_weights():
    rng = np.random.default_rng(3)
    w = rng.dirichlet(np.full(20, 0.3))
    v, _ = flatten_weights(w)
    assert v.sum() == pytest.approx(1.0)
    order = np.argsort(w)
    assert np.all(np.diff(v[order]) >= -1e-15)
    assert v[order[0]] >= w[order[0]]


def test_weighted_sample_uniform_when_target_equals_proposal():
    log_density = np.array([-1.0, -3.0, -0.5, -2.0])
    sample = WeightedSample.from_log_densities(np.zeros((4, 1)), log_density, log_density)
    np.testing.assert_allclose(sample.w, np.full(4, 0.25), rtol=1e-12)
    assert sample.gamma == pytest.approx(1.0)


def test_weighted_sample_handles_extreme_log_values():
    log_post = np.array([-1e4, -1e4 + math.log(3.0), -np.inf])
    sample = WeightedSample.from_log_densities(np.zeros((3, 1)), log_post, np.zeros(3))
    np.testing.assert_allclose(sample.w, [0.25, 0.75, 0.0], rtol=1e-12)


def test_weighted_sample_all_infinite_raises():
    with pytest.raises(DegenerateSampleError):
        WeightedSample.from_log_densities(np.zeros((2, 1)), [-np.inf, -np.inf], [0.0, 0.0])


def test_weighted_covariance_examples():
    np.testing.assert_allclose(weighted_covariance([[0.0], [2.0]], [0.5, 0.5]), [[1.0]])
    cov = weighted_covariance([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], [1.0, 1.0, 1.0])
    np.testing.assert_allclose(cov, np.full((2, 2), 2.0 / 3.0), rtol=1e-12)
    with pytest.raises(DegenerateSampleError):
        weighted_covariance([[0.0], [1.0], [2.0]], [1.0, 0.0, 0.0])
