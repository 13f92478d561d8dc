import numpy as np
import pytest

from uaproj import Gaussian, MixtureModel, ProjectionMatrix
from uaproj.model import apply_sign_convention


def random_covariance(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim))
    cov = a @ a.T / dim + 0.1 * np.eye(dim)
    return scale * 0.5 * (cov + cov.T)


def random_gaussian(rng, dim, mean_scale=1.0):
    return Gaussian(mean_scale * rng.standard_normal(dim), random_covariance(rng, dim))


def random_mixture(rng, dim, k):
    w = rng.dirichlet(np.ones(k))
    return MixtureModel(w, tuple(random_gaussian(rng, dim, mean_scale=3.0) for _ in range(k)))


def random_projection(rng, dim, d):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    basis = apply_sign_convention(q[:, :d])
    return ProjectionMatrix(basis, np.arange(d, 0, -1, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, after the run."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, ok in RESULTS:
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
