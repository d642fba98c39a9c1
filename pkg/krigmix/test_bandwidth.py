"""
Tests for the leave-one-out bandwidth objective and the (r, h) search
"""
import math

import numpy as np
import pytest

from krigmix.core.errors import ParameterError
from krigmix.sampling.bandwidth import (
    KernelGeometry,
    localize,
    loo_objective,
    optimize_h,
    select_tuning,
)
from krigmix.sampling.mixture import weighted_covariance


def _uniform(n):
    return np.full(n, 1.0 / n)


def test_two_points_closed_form():
    """For n = 2 and Sigma = 1, J(h) = log N(d; 0, h), maximized at h = d^2"""
    d = 1.7
    points = np.array([[0.0], [d]])
    h, j = optimize_h(points, _uniform(2), np.eye(1), tolerance=1e-6)
    assert h == pytest.approx(d * d, rel=1e-2)
    assert j == pytest.approx(-0.5 * math.log(2 * math.pi * d * d) - 0.5, abs=1e-4)


def test_objective_matches_direct_sum():
    rng = np.random.default_rng(0)
    points = rng.normal(size=(6, 2))
    w = rng.dirichlet(np.ones(6))
    sigma = np.array([[1.0, 0.3], [0.3, 0.5]])
    h = 0.7
    inverse = np.linalg.inv(h * sigma)
    norm = 1.0 / (2 * math.pi * math.sqrt(np.linalg.det(h * sigma)))
    expected = 0.0
    for i in range(6):
        total = 0.0
        for j in range(6):
            if j != i:
                diff = points[i] - points[j]
                total += w[j] * norm * math.exp(-0.5 * diff @ inverse @ diff)
        expected += w[i] * math.log(total / (1 - w[i]))
    assert loo_objective(points, w, sigma, h) == pytest.approx(expected, rel=1e-10)


def test_objective_falls_off_at_extremes():
    rng = np.random.default_rng(1)
    points = rng.normal(size=(30, 1))
    geometry = KernelGeometry.from_sigmas(points, np.eye(1))
    w = _uniform(30)
    middle = geometry.objective(w, 1.0)
    assert geometry.objective(w, 1e-6) < middle - 100
    assert geometry.objective(w, 1e6) < middle - 4


def test_objective_rejects_unit_weight():
    with pytest.raises(ParameterError):
        loo_objective([[0.0], [1.0]], [1.0, 0.0], np.eye(1), 1.0)


def test_optimal_h_is_scale_equivariant():
    """Rescaling the points and their covariance leaves h* unchanged"""
    rng = np.random.default_rng(2)
    points = rng.normal(size=(40, 2))
    w = rng.dirichlet(np.full(40, 2.0))
    sigma = weighted_covariance(points, w)
    h1, _ = optimize_h(points, w, sigma, tolerance=1e-6)
    h2, _ = optimize_h(points * 25.0, w, sigma * 625.0, tolerance=1e-6)
    assert h2 == pytest.approx(h1, rel=1e-3)


def test_optimize_h_stays_inside_bounds():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(20, 1))
    h, _ = optimize_h(points, _uniform(20), np.eye(1), bounds=(2.0, 3.0))
    assert 2.0 <= h <= 3.0


def test_localize_separates_clusters():
    rng = np.random.default_rng(4)
    points = np.vstack([
        rng.normal(scale=0.01, size=(10, 1)),
        100.0 + rng.normal(scale=0.01, size=(10, 1)),
    ])
    v = _uniform(20)
    sigmas = np.broadcast_to(weighted_covariance(points, v), (20, 1, 1))
    neighborhoods = [np.arange(20)] * 20
    new_neighborhoods, new_sigmas, fallbacks = localize(points, v, sigmas, neighborhoods, 0.5)
    assert fallbacks == 0
    for i in range(20):
        cluster = np.arange(10) if i < 10 else np.arange(10, 20)
        np.testing.assert_array_equal(new_neighborhoods[i], cluster)
        assert new_sigmas[i, 0, 0] < 1e-3


def test_localize_keeps_self_and_nests():
    rng = np.random.default_rng(5)
    points = rng.normal(size=(32, 2))
    v = rng.dirichlet(np.ones(32))
    sigmas = np.broadcast_to(weighted_covariance(points, v), (32, 2, 2))
    level1, sigmas1, _ = localize(points, v, sigmas, [np.arange(32)] * 32, 0.5)
    level2, _, _ = localize(points, v, sigmas1, level1, 0.25)
    for i in range(32):
        assert i in level1[i] and i in level2[i]
        assert len(level1[i]) == 16 and len(level2[i]) == 8
        assert set(level2[i]) <= set(level1[i])


def test_localize_rejects_too_small_neighbourhoods():
    points = np.random.default_rng(6).normal(size=(8, 3))
    sigmas = np.broadcast_to(np.eye(3), (8, 3, 3))
    with pytest.raises(ParameterError):
        localize(points, _uniform(8), sigmas, [np.arange(8)] * 8, 0.25)


def test_select_tuning_prefers_local_kernels_for_clusters():
    rng = np.random.default_rng(7)
    points = np.vstack([
        rng.normal(scale=0.05, size=(40, 2)),
        np.array([10.0, -10.0]) + rng.normal(scale=0.05, size=(40, 2)),
    ])
    w = _uniform(80)
    tuning = select_tuning(points, w, w)
    assert tuning.r_star < 1.0
    assert tuning.sigmas.shape == (80, 2, 2)
    np.testing.assert_allclose(tuning.covariances, tuning.h_star * tuning.sigmas)


def test_select_tuning_returns_best_visited_level():
    rng = np.random.default_rng(8)
    points = rng.normal(size=(200, 2))
    w = _uniform(200)
    tuning = select_tuning(points, w, w)
    assert [r for r, _, _ in tuning.visited] == [1.0, 0.5, 0.25, 0.125]
    assert tuning.j_star == max(j for _, _, j in tuning.visited)
    assert (tuning.r_star, tuning.h_star, tuning.j_star) in tuning.visited


def test_select_tuning_minimum_sample_size():
    rng = np.random.default_rng(9)
    with pytest.raises(ParameterError):
        select_tuning(rng.normal(size=(5, 2)), _uniform(5), _uniform(5))
    tuning = select_tuning(rng.normal(size=(6, 2)), _uniform(6), _uniform(6))
    assert [r for r, _, _ in tuning.visited] == [1.0, 0.5]


def test_tuning_result_reproduces_its_objective_and_ignores_sample_order():
    rng = np.random.default_rng(10)
    points = np.vstack([rng.normal(size=(30, 2)), np.array([4.0, 0.0]) + rng.normal(scale=0.5, size=(30, 2))])
    w = rng.dirichlet(np.full(60, 3.0))
    tuning = select_tuning(points, w, w)
    assert loo_objective(points, w, tuning.sigmas, tuning.h_star) == pytest.approx(tuning.j_star, rel=1e-12)

    order = rng.permutation(60)
    shuffled = select_tuning(points[order], w[order], w[order])
    assert shuffled.r_star == tuning.r_star
    assert shuffled.h_star == pytest.approx(tuning.h_star, rel=2e-3)
    assert shuffled.j_star == pytest.approx(tuning.j_star, rel=1e-6)
    np.testing.assert_allclose(shuffled.sigmas, tuning.sigmas[order], rtol=1e-9, atol=1e-12)
