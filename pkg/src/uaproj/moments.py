"""Empirical moments of samples and exact aggregated moments of mixtures.

The between-component covariance term is computed from mean deviations
(mu_k - mu_hat) rather than by subtracting outer products, which avoids the
cancellation of large near-equal quantities in high dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import Gaussian, MixtureModel, _freeze, check_psd, check_symmetric


@dataclass(frozen=True)
class AggregatedMoments:
    """Exact first and second moments of one mixture (or class)."""

    mean_hat: np.ndarray
    cov_hat: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean_hat, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov_hat, dtype=np.float64)
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise ValidationError("cov_hat shape does not match mean_hat")
        check_symmetric(cov, name="cov_hat")
        check_psd(cov, name="cov_hat")
        object.__setattr__(self, "mean_hat", _freeze(mean))
        object.__setattr__(self, "cov_hat", _freeze(cov))

    @property
    def dim(self) -> int:
        return self.mean_hat.shape[0]


def empirical_moments(samples: np.ndarray) -> Gaussian:
    """Sample mean and unbiased (1/(N-1)) sample covariance as a Gaussian."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("samples must be an N x D matrix")
    if x.shape[0] < 2:
        raise ValidationError("at least 2 samples required for a covariance")
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite values in samples")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    cov = 0.5 * (cov + cov.T)
    return Gaussian(mean, cov)


def aggregate_mixture(m: MixtureModel) -> AggregatedMoments:
    """Exact mean and covariance of a mixture, combining component
    covariances with the dispersion of the component means."""
    w = m.weights
    means = np.stack([g.mean for g in m.gaussians])
    mean_hat = w @ means
    cov_hat = np.zeros((m.dim, m.dim))
    for wk, g in zip(w, m.gaussians):
        dev = g.mean - mean_hat
        cov_hat += wk * (g.cov + np.outer(dev, dev))
    cov_hat = 0.5 * (cov_hat + cov_hat.T)
    return AggregatedMoments(mean_hat, cov_hat)
