"""Weighted uncertainty-aware covariance, projection matrices, and the
closed-form projection of Gaussians, mixtures, and raw samples.

The four-step pipeline: per-class aggregated moments (tau-independent),
tau-weighted combination into the uncertainty-aware covariance, symmetric
eigendecomposition, and the leading-eigenvector projection. Class moments can
be cached by callers and recombined cheaply whenever tau changes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NumericalError, ValidationError
from .model import (
    Gaussian,
    ImportanceWeights,
    MixtureModel,
    ProjectionMatrix,
    apply_sign_convention,
    _freeze,
)
from .moments import AggregatedMoments

# Relative eigenvalue gap below which two eigenvalues count as tied.
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class WeightedMomentSet:
    """Per-class moments plus tau and the derived uncertainty-aware covariance."""

    classes: tuple[tuple[AggregatedMoments, int], ...]
    tau: ImportanceWeights
    mean_bar: np.ndarray
    centering: np.ndarray
    sigma_bar: np.ndarray
    sigma_mu: np.ndarray
    sigma_ua: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean_bar.shape[0]


def build_weighted_moments(
    moments: Sequence[AggregatedMoments],
    tau: ImportanceWeights,
    class_ids: Sequence[int] | None = None,
) -> WeightedMomentSet:
    """Combine per-class aggregated moments under importance weights tau."""
    if len(moments) < 1:
        raise ValidationError("at least one class required")
    if len(moments) != len(tau):
        raise ValidationError(
            f"{len(moments)} classes but {len(tau)} importance weights"
        )
    dim = moments[0].dim
    if any(m.dim != dim for m in moments):
        raise DimensionMismatchError("class moments differ in dimension")
    if class_ids is None:
        class_ids = range(len(moments))

    t = tau.tau
    means = np.stack([m.mean_hat for m in moments])
    mean_bar = t @ means
    centering = np.outer(mean_bar, mean_bar)
    sigma_bar = np.zeros((dim, dim))
    for ti, m in zip(t, moments):
        sigma_bar += ti * m.cov_hat
    sigma_mu = (means.T * t) @ means
    sigma_ua = sigma_mu + sigma_bar - centering
    sigma_ua = 0.5 * (sigma_ua + sigma_ua.T)
    return WeightedMomentSet(
        classes=tuple(zip(moments, (int(c) for c in class_ids))),
        tau=tau,
        mean_bar=_freeze(mean_bar),
        centering=_freeze(centering),
        sigma_bar=_freeze(0.5 * (sigma_bar + sigma_bar.T)),
        sigma_mu=_freeze(0.5 * (sigma_mu + sigma_mu.T)),
        sigma_ua=_freeze(sigma_ua),
    )


def _leading_eigenvectors(sym: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    big_d = sym.shape[0]
    try:
        if d + 1 < big_d and big_d > 64:
            # large matrix, few directions wanted: a partial decomposition is
            # 2-3x faster; include one extra eigenvalue for the gap check
            from scipy.linalg import eigh

            eigvals, eigvecs = eigh(sym, subset_by_index=[big_d - d - 1, big_d - 1])
        else:
            eigvals, eigvecs = np.linalg.eigh(sym)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("symmetric eigendecomposition failed") from exc
    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    if d < sym.shape[0]:
        gap = abs(eigvals[d - 1] - eigvals[d])
        scale = max(1.0, abs(eigvals[d - 1]))
        if gap <= DEGENERACY_TOL * scale:
            warnings.warn(
                "eigenvalues tied at the projection cut; keeping deterministic "
                "descending order",
                RuntimeWarning,
                stacklevel=3,
            )
    return eigvals[:d], eigvecs[:, :d]


def projection_from_ua(wms: WeightedMomentSet, d: int) -> ProjectionMatrix:
    """Leading-d eigenvector projection of the uncertainty-aware covariance."""
    big_d = wms.dim
    if not 1 <= d <= big_d:
        raise ValidationError(f"d={d} out of range [1, {big_d}]")
    eigvals, basis = _leading_eigenvectors(np.asarray(wms.sigma_ua), d)
    return ProjectionMatrix(apply_sign_convention(basis), eigvals)


def pca(samples: np.ndarray, d: int) -> tuple[ProjectionMatrix, np.ndarray]:
    """Plain PCA of a sample matrix; returns the projection and column mean.

    Uses the thin SVD of the centered data, equivalent to the symmetric
    eigendecomposition of the unbiased sample covariance.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValidationError("PCA needs an N x D matrix with N >= 2")
    if not 1 <= d <= x.shape[1]:
        raise ValidationError(f"d={d} out of range [1, {x.shape[1]}]")
    mean = x.mean(axis=0)
    centered = (x - mean) / np.sqrt(x.shape[0] - 1)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    eigvals = np.zeros(d)
    k = min(d, svals.shape[0])
    eigvals[:k] = svals[:k] ** 2
    basis = np.zeros((x.shape[1], d))
    basis[:, :k] = vt[:k].T
    if k < d:
        # rank-deficient data: pad with an orthonormal complement
        q, _ = np.linalg.qr(np.eye(x.shape[1]) - vt[:k].T @ vt[:k])
        basis[:, k:] = q[:, : d - k]
    return ProjectionMatrix(apply_sign_convention(basis), eigvals), mean


def project_gaussian(g: Gaussian, p: ProjectionMatrix) -> Gaussian:
    """Closed-form pushforward of a Gaussian through the projection."""
    if g.dim != p.dim:
        raise DimensionMismatchError(
            f"Gaussian dimension {g.dim} != projection dimension {p.dim}"
        )
    b = p.basis
    mean = b.T @ g.mean
    cov = b.T @ g.cov @ b
    return Gaussian(mean, 0.5 * (cov + cov.T))


def project_mixture(m: MixtureModel, p: ProjectionMatrix) -> MixtureModel:
    """Componentwise projection; weights carry over untouched."""
    return MixtureModel(
        m.weights, tuple(project_gaussian(g, p) for g in m.gaussians)
    )


def project_samples(
    samples: np.ndarray,
    p: ProjectionMatrix,
    center: np.ndarray | None = None,
) -> np.ndarray:
    """Map each row to basis^T (x - center); center defaults to zero so sample
    projections line up with the uncentered mixture projection."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.dim:
        raise DimensionMismatchError(
            f"samples must be N x {p.dim}, got shape {x.shape}"
        )
    if center is not None:
        center = np.asarray(center, dtype=np.float64).reshape(-1)
        if center.shape[0] != p.dim:
            raise DimensionMismatchError("center length does not match dimension")
        x = x - center
    return x @ p.basis
