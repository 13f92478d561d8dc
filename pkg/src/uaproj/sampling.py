"""Seeded sampling from Gaussians/mixtures and synthetic dataset generation.

Every generator derives its stream from ``np.random.SeedSequence`` keyed by
(seed, substream ids), so concurrent and serial generation produce identical
output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .model import Gaussian, LabeledDataset, MixtureModel, regularized

_MASK64 = (1 << 64) - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic per-task RNG derived from (seed, key...)."""
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in key]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _cov_factor(cov: np.ndarray) -> np.ndarray:
    """Cholesky of the regularized covariance, falling back to a symmetric
    eigenvalue square root for rank-deficient inputs (e.g. zero covariance)."""
    reg = regularized(cov)
    try:
        return np.linalg.cholesky(reg)
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(reg)
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_gaussian(
    g: Gaussian, n: int, seed: int | np.random.Generator
) -> np.ndarray:
    if n < 1:
        raise ValidationError("sample count must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    factor = _cov_factor(g.cov)
    x = rng.standard_normal((n, g.dim)) @ factor.T
    x += g.mean
    return x


def sample_mixture(
    m: MixtureModel, n: int, seed: int | np.random.Generator
) -> np.ndarray:
    """Ancestral sampling: categorical component draw, then Gaussian draw."""
    if n < 1:
        raise ValidationError("sample count must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    if m.n_components == 1:
        return sample_gaussian(m.gaussians[0], n, rng)
    assignment = rng.choice(m.n_components, size=n, p=m.weights)
    out = np.empty((n, m.dim))
    for k, g in enumerate(m.gaussians):
        idx = np.flatnonzero(assignment == k)
        if idx.size:
            out[idx] = sample_gaussian(g, idx.size, rng)
    return out


# ---------------------------------------------------------------------------
# Analytic per-dimension specifications
# ---------------------------------------------------------------------------

_KINDS = ("normal", "uniform", "trapezoid", "constant")


@dataclass(frozen=True)
class DimensionSpec:
    """One independent 1D law: normal(mu, sigma), uniform(a, b),
    trapezoid(a, b, c, d), or constant(v)."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if self.kind == "normal":
            if len(params) != 2 or params[1] <= 0:
                raise ValidationError("normal needs (mu, sigma) with sigma > 0")
        elif self.kind == "uniform":
            if len(params) != 2 or not params[0] < params[1]:
                raise ValidationError("uniform needs (a, b) with a < b")
        elif self.kind == "trapezoid":
            if len(params) != 4:
                raise ValidationError("trapezoid needs (a, b, c, d)")
            a, b, c, d = params
            if not (a <= b <= c <= d) or not a < d:
                raise ValidationError("trapezoid needs a <= b <= c <= d, a < d")
        elif self.kind == "constant":
            if len(params) != 1:
                raise ValidationError("constant needs (v,)")
        object.__setattr__(self, "params", params)


@dataclass(frozen=True)
class ClassSpec:
    name: str
    dims: tuple[DimensionSpec, ...]


@dataclass(frozen=True)
class AnalyticSpec:
    """Per-class lists of independent per-dimension distributions."""

    classes: tuple[ClassSpec, ...]

    def __post_init__(self):
        if len(self.classes) < 1:
            raise ValidationError("at least one class required")
        dim = len(self.classes[0].dims)
        if any(len(c.dims) != dim for c in self.classes):
            raise ValidationError("classes differ in dimensionality")

    @property
    def dim(self) -> int:
        return len(self.classes[0].dims)

    def to_json(self) -> dict:
        return {
            "classes": [
                {
                    "name": c.name,
                    "dims": [
                        {"kind": d.kind, "params": list(d.params)} for d in c.dims
                    ],
                }
                for c in self.classes
            ]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AnalyticSpec":
        try:
            classes = tuple(
                ClassSpec(
                    name=str(c["name"]),
                    dims=tuple(
                        DimensionSpec(d["kind"], tuple(d["params"]))
                        for d in c["dims"]
                    ),
                )
                for c in obj["classes"]
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed analytic spec: {exc}") from exc
        return cls(classes)

    @classmethod
    def load(cls, path) -> "AnalyticSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _sample_trapezoid(
    a: float, b: float, c: float, d: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Inverse-CDF draw from the rising/flat/falling trapezoidal density."""
    h = 2.0 / (d + c - b - a)
    m1 = 0.5 * h * (b - a)  # mass of the rising ramp
    m2 = h * (c - b)  # mass of the flat top
    u = rng.random(n)
    out = np.empty(n)
    lo = u < m1
    mid = (~lo) & (u < m1 + m2)
    hi = ~(lo | mid)
    if b > a:
        out[lo] = a + np.sqrt(2.0 * u[lo] * (b - a) / h)
    else:
        out[lo] = a
    out[mid] = b + (u[mid] - m1) / h
    if d > c:
        out[hi] = d - np.sqrt(2.0 * (1.0 - u[hi]) * (d - c) / h)
    else:
        out[hi] = d
    return out


def _sample_dimension(
    spec: DimensionSpec, n: int, rng: np.random.Generator
) -> np.ndarray:
    p = spec.params
    if spec.kind == "normal":
        return rng.normal(p[0], p[1], size=n)
    if spec.kind == "uniform":
        return rng.uniform(p[0], p[1], size=n)
    if spec.kind == "trapezoid":
        return _sample_trapezoid(*p, n, rng)
    return np.full(n, p[0])


def sample_analytic(
    spec: AnalyticSpec, n_per_class: int = 100_000, seed: int = 0
) -> LabeledDataset:
    """Draw each dimension independently per its 1D law, one block per class."""
    if n_per_class < 1:
        raise ValidationError("n_per_class must be positive")
    blocks, labels = [], []
    for ci, cspec in enumerate(spec.classes):
        cols = [
            _sample_dimension(dspec, n_per_class, substream(seed, ci, di))
            for di, dspec in enumerate(cspec.dims)
        ]
        blocks.append(np.column_stack(cols))
        labels.append(np.full(n_per_class, ci, dtype=np.int64))
    return LabeledDataset(
        np.vstack(blocks),
        np.concatenate(labels),
        tuple(c.name for c in spec.classes),
    )


def make_synthetic_multimodal(
    class_specs: Sequence[tuple[Sequence[np.ndarray], Sequence[np.ndarray], Sequence[float]]],
    n_per_class: Sequence[int] | int,
    seed: int = 0,
    names: Sequence[str] | None = None,
) -> tuple[LabeledDataset, list[MixtureModel]]:
    """Sample ground-truth mixtures per class; returns the dataset together
    with the true models for oracle comparisons.

    Each class spec is (means, covs, weights) for one mixture.
    """
    models = [
        MixtureModel(
            np.asarray(weights, dtype=np.float64),
            tuple(Gaussian(mu, cov) for mu, cov in zip(means, covs)),
        )
        for means, covs, weights in class_specs
    ]
    if isinstance(n_per_class, int):
        n_per_class = [n_per_class] * len(models)
    if len(n_per_class) != len(models):
        raise ValidationError("one sample count per class required")
    blocks, labels = [], []
    for ci, (m, n) in enumerate(zip(models, n_per_class)):
        blocks.append(sample_mixture(m, n, substream(seed, ci)))
        labels.append(np.full(n, ci, dtype=np.int64))
    if names is None:
        names = [f"class{ci}" for ci in range(len(models))]
    dataset = LabeledDataset(np.vstack(blocks), np.concatenate(labels), tuple(names))
    return dataset, models
