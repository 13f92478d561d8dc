"""Core value types: Gaussians, mixtures, projections, datasets, density grids.

All types are immutable after construction and validate their invariants
eagerly. Density evaluation is done in log space and accumulated with
log-sum-exp so high-dimensional tails underflow to 0 instead of NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import DimensionMismatchError, SingularModelError, ValidationError

# Diagonal regularization added before inversion/Cholesky: eps * trace/D.
REG_EPSILON = 1e-9
SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-9
# Weight drift up to this amount is silently renormalized (serialized models
# accumulate rounding); anything larger is rejected.
WEIGHT_DRIFT_TOL = 1e-6

_LOG_2PI = np.log(2.0 * np.pi)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def check_symmetric(cov: np.ndarray, *, name: str = "cov") -> None:
    scale = max(1.0, float(np.max(np.abs(cov))) if cov.size else 1.0)
    if float(np.max(np.abs(cov - cov.T))) > SYMMETRY_TOL * scale:
        raise ValidationError(f"{name} is not symmetric within tolerance")


def check_psd(cov: np.ndarray, *, name: str = "cov") -> None:
    eigvals = np.linalg.eigvalsh(cov)
    floor = max(1.0, float(eigvals[-1]))
    if eigvals[0] < -PSD_TOL * floor:
        raise ValidationError(
            f"{name} is not positive semidefinite (min eigenvalue {eigvals[0]:.3e})"
        )


def regularized(cov: np.ndarray, eps: float = REG_EPSILON) -> np.ndarray:
    """Add ``eps * trace/D`` to the diagonal; the documented repair before
    any inversion or Cholesky."""
    d = cov.shape[0]
    return cov + (eps * np.trace(cov) / d) * np.eye(d)


@dataclass(frozen=True)
class Gaussian:
    """Multivariate normal with mean vector and symmetric PSD covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValidationError("cov must be a square matrix")
        if mean.shape[0] != cov.shape[0]:
            raise DimensionMismatchError(
                f"mean length {mean.shape[0]} != cov dimension {cov.shape[0]}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValidationError("non-finite values in Gaussian parameters")
        check_symmetric(cov)
        check_psd(cov)
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "cov", _freeze(cov))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Gaussian":
        return cls(np.asarray(obj["mean"]), np.asarray(obj["cov"]))


@dataclass(frozen=True)
class MixtureModel:
    """Convex combination of Gaussians over a shared dimension."""

    weights: np.ndarray
    gaussians: tuple[Gaussian, ...]

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        gaussians = tuple(self.gaussians)
        if len(gaussians) < 1:
            raise ValidationError("mixture needs at least one component")
        if weights.shape[0] != len(gaussians):
            raise ValidationError("weights and components differ in length")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValidationError("weights must be non-negative and finite")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_DRIFT_TOL:
            raise ValidationError(f"weights sum to {total}, expected 1")
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            weights = weights / total
        dim = gaussians[0].dim
        if any(g.dim != dim for g in gaussians):
            raise DimensionMismatchError("mixture components differ in dimension")
        object.__setattr__(self, "weights", _freeze(weights))
        object.__setattr__(self, "gaussians", gaussians)

    @property
    def dim(self) -> int:
        return self.gaussians[0].dim

    @property
    def n_components(self) -> int:
        return len(self.gaussians)

    @classmethod
    def from_components(
        cls, components: Sequence[tuple[float, Gaussian]]
    ) -> "MixtureModel":
        weights = np.array([w for w, _ in components])
        return cls(weights, tuple(g for _, g in components))

    @classmethod
    def single(cls, g: Gaussian) -> "MixtureModel":
        return cls(np.array([1.0]), (g,))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "components": [
                {"weight": float(w), "mean": g.mean.tolist(), "cov": g.cov.tolist()}
                for w, g in zip(self.weights, self.gaussians)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MixtureModel":
        comps = obj["components"]
        weights = np.array([c["weight"] for c in comps])
        gaussians = tuple(
            Gaussian(np.asarray(c["mean"]), np.asarray(c["cov"])) for c in comps
        )
        m = cls(weights, gaussians)
        if m.dim != obj["dim"]:
            raise ValidationError("declared dim does not match components")
        return m


def apply_sign_convention(basis: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-|entry| of each column is positive
    (ties broken by lowest row index)."""
    basis = np.array(basis, dtype=np.float64, copy=True)
    for j in range(basis.shape[1]):
        col = basis[:, j]
        idx = int(np.argmax(np.abs(col)))
        if col[idx] < 0:
            basis[:, j] = -col
    return basis


@dataclass(frozen=True)
class ProjectionMatrix:
    """Column-orthonormal D x d map with the eigenvalues that produced it."""

    basis: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64).reshape(-1)
        if basis.ndim != 2:
            raise ValidationError("basis must be a 2D matrix")
        big_d, d = basis.shape
        if d > big_d:
            raise ValidationError(f"d={d} exceeds ambient dimension D={big_d}")
        if eigenvalues.shape[0] != d:
            raise ValidationError("one eigenvalue per basis column required")
        gram = basis.T @ basis
        if float(np.max(np.abs(gram - np.eye(d)))) > SYMMETRY_TOL:
            raise ValidationError("basis columns are not orthonormal")
        if np.any(np.diff(eigenvalues) > 0):
            raise ValidationError("eigenvalues must be sorted descending")
        for j in range(d):
            idx = int(np.argmax(np.abs(basis[:, j])))
            if basis[idx, j] < 0:
                raise ValidationError(
                    "sign convention violated: largest-|entry| of each column "
                    "must be positive (use apply_sign_convention)"
                )
        object.__setattr__(self, "basis", _freeze(basis))
        object.__setattr__(self, "eigenvalues", _freeze(eigenvalues))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "d": self.d,
            "eigenvalues": self.eigenvalues.tolist(),
            "basis": self.basis.T.tolist(),  # list of columns
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ProjectionMatrix":
        basis = np.asarray(obj["basis"]).T
        p = cls(basis, np.asarray(obj["eigenvalues"]))
        if p.dim != obj["dim"] or p.d != obj["d"]:
            raise ValidationError("declared shape does not match basis")
        return p


@dataclass(frozen=True)
class LabeledDataset:
    """Sample matrix with dense integer labels and per-label names."""

    samples: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...]

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        names = tuple(str(n) for n in self.label_names)
        if samples.ndim != 2:
            raise ValidationError("samples must be an N x D matrix")
        if labels.shape[0] != samples.shape[0]:
            raise ValidationError("one label per sample required")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("non-finite values in samples")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise ValidationError("label out of range of label_names")
        counts = np.bincount(labels, minlength=len(names))
        if np.any(counts == 0):
            missing = [names[i] for i in np.flatnonzero(counts == 0)]
            raise ValidationError(f"classes without samples: {missing}")
        labels = np.ascontiguousarray(labels)
        labels.setflags(write=False)
        object.__setattr__(self, "samples", _freeze(samples))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "label_names", names)

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def class_samples(self, class_id: int) -> np.ndarray:
        return self.samples[self.labels == class_id]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class ImportanceWeights:
    """Per-class weights tau; non-negative, summing to one."""

    tau: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=np.float64).reshape(-1)
        if tau.shape[0] < 1:
            raise ValidationError("tau must be non-empty")
        if np.any(tau < 0) or not np.all(np.isfinite(tau)):
            raise ValidationError("tau entries must be non-negative and finite")
        if abs(float(tau.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"tau sums to {tau.sum()}, expected 1")
        object.__setattr__(self, "tau", _freeze(tau))

    def __len__(self) -> int:
        return self.tau.shape[0]

    @classmethod
    def equal(cls, n_classes: int) -> "ImportanceWeights":
        return cls(np.full(n_classes, 1.0 / n_classes))

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "ImportanceWeights":
        c = np.asarray(counts, dtype=np.float64)
        if np.any(c <= 0):
            raise ValidationError("sample counts must be positive")
        return cls(c / c.sum())

    @classmethod
    def normalized(cls, raw: Sequence[float]) -> "ImportanceWeights":
        t = np.asarray(raw, dtype=np.float64).reshape(-1)
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValidationError("tau entries must be non-negative and finite")
        total = float(t.sum())
        if total <= 0:
            raise ValidationError("tau must have positive total mass")
        return cls(t / total)


@dataclass(frozen=True)
class DensityGrid:
    """Uniform 2D raster of non-negative density values.

    ``origin`` is the data-space coordinate of the center of cell (0, 0);
    ``values[i, j]`` sits at ``origin + (i * dx, j * dy)``.
    """

    origin: tuple[float, float]
    spacing: tuple[float, float]
    values: np.ndarray

    def __post_init__(self):
        origin = (float(self.origin[0]), float(self.origin[1]))
        spacing = (float(self.spacing[0]), float(self.spacing[1]))
        values = np.asarray(self.values, dtype=np.float64)
        if spacing[0] <= 0 or spacing[1] <= 0:
            raise ValidationError("grid spacing must be positive")
        if values.ndim != 2:
            raise ValidationError("grid values must be 2D")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValidationError("grid values must be finite and non-negative")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", _freeze(values))

    @property
    def cell_area(self) -> float:
        return self.spacing[0] * self.spacing[1]

    @property
    def total_mass(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def normalized(self) -> "DensityGrid":
        mass = self.total_mass
        if mass <= 0:
            raise ValidationError("cannot normalize a zero-mass grid")
        return DensityGrid(self.origin, self.spacing, self.values / mass)

    def x_coords(self) -> np.ndarray:
        return self.origin[0] + self.spacing[0] * np.arange(self.values.shape[0])

    def y_coords(self) -> np.ndarray:
        return self.origin[1] + self.spacing[1] * np.arange(self.values.shape[1])

    def same_geometry(self, other: "DensityGrid", tol: float = 1e-9) -> bool:
        return (
            self.values.shape == other.values.shape
            and abs(self.origin[0] - other.origin[0]) <= tol
            and abs(self.origin[1] - other.origin[1]) <= tol
            and abs(self.spacing[0] - other.spacing[0]) <= tol
            and abs(self.spacing[1] - other.spacing[1]) <= tol
        )


def _chol_logpdf_terms(g: Gaussian) -> tuple[np.ndarray, float]:
    """Cholesky factor of the regularized covariance and the log normalizer."""
    cov = regularized(g.cov)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularModelError(
            "covariance numerically singular beyond regularization"
        ) from exc
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    log_norm = -0.5 * (g.dim * _LOG_2PI + log_det)
    return chol, log_norm


def gaussian_logpdf(g: Gaussian, x: np.ndarray) -> np.ndarray:
    """Log density of ``g`` at one point (shape D) or a batch (shape N x D)."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != g.dim:
        raise DimensionMismatchError(
            f"points have dimension {pts.shape[1]}, Gaussian has {g.dim}"
        )
    chol, log_norm = _chol_logpdf_terms(g)
    diff = pts - g.mean
    sol = solve_triangular(chol, diff.T, lower=True)
    maha = np.sum(sol * sol, axis=0)
    out = log_norm - 0.5 * maha
    return out[0] if squeeze else out


def gaussian_pdf(g: Gaussian, x: np.ndarray) -> np.ndarray | float:
    out = np.exp(gaussian_logpdf(g, x))
    return float(out) if np.ndim(out) == 0 else out


def mixture_logpdf(m: MixtureModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != m.dim:
        raise DimensionMismatchError(
            f"points have dimension {pts.shape[1]}, mixture has {m.dim}"
        )
    with np.errstate(divide="ignore"):
        log_w = np.log(m.weights)
    comp = np.stack([gaussian_logpdf(g, pts) for g in m.gaussians], axis=0)
    out = logsumexp(comp + log_w[:, None], axis=0)
    return out[0] if squeeze else out


def mixture_pdf(m: MixtureModel, x: np.ndarray) -> np.ndarray | float:
    out = np.exp(mixture_logpdf(m, x))
    return float(out) if np.ndim(out) == 0 else out
