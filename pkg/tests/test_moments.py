import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uaproj import (
    Gaussian,
    MixtureModel,
    ValidationError,
    aggregate_mixture,
    empirical_moments,
    sample_mixture,
)

from conftest import random_mixture


def test_two_point_hand_case():
    g = empirical_moments(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert np.allclose(g.mean, [1.0, 0.0])
    assert np.allclose(g.cov, [[2.0, 0.0], [0.0, 0.0]])


def test_identical_rows_zero_covariance():
    g = empirical_moments(np.tile([1.5, -2.0], (7, 1)))
    assert np.allclose(g.cov, 0.0)


def test_insufficient_samples():
    with pytest.raises(ValidationError):
        empirical_moments(np.array([[1.0, 2.0]]))
    with pytest.raises(ValidationError):
        empirical_moments(np.array([[1.0], [np.inf]]))


def test_monte_carlo_moment_recovery(rng):
    mean = np.array([1.0, -2.0, 0.5])
    cov = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, -0.2], [0.0, -0.2, 0.5]])
    x = rng.multivariate_normal(mean, cov, size=1_000_000)
    g = empirical_moments(x)
    assert np.allclose(g.mean, mean, atol=0.01 * np.abs(mean).max())
    assert np.allclose(g.cov, cov, rtol=0.01, atol=0.01)


def test_single_component_aggregate_passthrough(rng):
    m = random_mixture(rng, 3, 1)
    agg = aggregate_mixture(m)
    assert np.allclose(agg.mean_hat, m.gaussians[0].mean)
    assert np.allclose(agg.cov_hat, m.gaussians[0].cov)


def test_two_point_mixture_aggregate():
    tiny = 1e-12  # exactly-zero covariances are valid but make the PSD check moot
    m = MixtureModel.from_components(
        [(0.5, Gaussian([-1.0], [[tiny]])), (0.5, Gaussian([1.0], [[tiny]]))]
    )
    agg = aggregate_mixture(m)
    assert agg.mean_hat[0] == pytest.approx(0.0, abs=1e-12)
    assert agg.cov_hat[0, 0] == pytest.approx(1.0, rel=1e-9)


def test_aggregate_matches_monte_carlo(rng):
    m = random_mixture(rng, 3, 5)
    agg = aggregate_mixture(m)
    x = sample_mixture(m, 1_000_000, 7)
    emp = empirical_moments(x)
    scale = np.abs(agg.mean_hat).max()
    assert np.allclose(emp.mean, agg.mean_hat, atol=0.01 * max(scale, 1.0))
    assert np.allclose(emp.cov, agg.cov_hat, rtol=0.02, atol=0.02 * np.abs(agg.cov_hat).max())


def test_aggregate_permutation_invariant(rng):
    m = random_mixture(rng, 4, 3)
    perm = [2, 0, 1]
    m2 = MixtureModel(m.weights[perm], tuple(m.gaussians[i] for i in perm))
    a1, a2 = aggregate_mixture(m), aggregate_mixture(m2)
    assert np.allclose(a1.mean_hat, a2.mean_hat, atol=1e-12)
    assert np.allclose(a1.cov_hat, a2.cov_hat, atol=1e-12)


def test_between_component_term_is_psd(rng):
    for _ in range(10):
        m = random_mixture(rng, 4, 3)
        agg = aggregate_mixture(m)
        within = sum(w * g.cov for w, g in zip(m.weights, m.gaussians))
        between = agg.cov_hat - within
        assert np.linalg.eigvalsh(between).min() >= -1e-10


@settings(max_examples=25, deadline=None)
@given(
    k=st.integers(1, 4),
    dim=st.integers(1, 6),
    seed=st.integers(0, 2**31),
)
def test_aggregate_properties_random_mixtures(k, dim, seed):
    rng = np.random.default_rng(seed)
    m = random_mixture(rng, dim, k)
    agg = aggregate_mixture(m)
    # mean is the weight-convex combination of component means
    expected_mean = sum(w * g.mean for w, g in zip(m.weights, m.gaussians))
    assert np.allclose(agg.mean_hat, expected_mean, atol=1e-12)
    # covariance is symmetric PSD and dominates the within-component part
    assert np.allclose(agg.cov_hat, agg.cov_hat.T, atol=1e-12)
    assert np.linalg.eigvalsh(agg.cov_hat).min() >= -1e-10
