"""Mixture fitting by expectation-maximization with BIC component selection.

EM runs in log space with full covariances and diagonal regularization.
Component counts are selected by the lowest BIC over a configured range; for
high-dimensional data the BIC sweep runs in a plain-PCA-reduced space and the
winning count is refit in the original space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import FitError, ValidationError
from .model import Gaussian, LabeledDataset, MixtureModel, gaussian_logpdf, mixture_logpdf
from .moments import empirical_moments
from .projection import pca, project_samples
from .sampling import substream

# Responsibility mass below this fraction of N marks a component as empty.
EMPTY_COMPONENT_FRACTION = 1e-6
KMEANS_ITERATIONS = 10


@dataclass(frozen=True)
class FitConfig:
    k_min: int = 1
    k_max: int = 30
    max_iterations: int = 200
    loglik_tolerance: float = 1e-4
    restarts: int = 5
    reg_epsilon: float = 1e-6
    reduce_dim: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.k_min < 1 or self.k_max < self.k_min:
            raise ValidationError("need 1 <= k_min <= k_max")
        if self.max_iterations < 1 or self.restarts < 1 or self.reduce_dim < 1:
            raise ValidationError("iteration/restart/reduce_dim counts must be positive")
        if self.loglik_tolerance <= 0 or self.reg_epsilon <= 0:
            raise ValidationError("tolerances must be positive")

    def to_json(self) -> dict:
        return {
            "k_min": self.k_min,
            "k_max": self.k_max,
            "max_iterations": self.max_iterations,
            "loglik_tolerance": self.loglik_tolerance,
            "restarts": self.restarts,
            "reg_epsilon": self.reg_epsilon,
            "reduce_dim": self.reduce_dim,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FitConfig":
        return cls(**{k: obj[k] for k in obj})


@dataclass(frozen=True)
class FitReport:
    chosen_k: int
    bic_curve: tuple[tuple[int, float], ...]
    final_loglik: float
    iterations_used: int
    converged: bool
    reduced_dim: int | None = None
    n_samples: int = 0

    def to_json(self) -> dict:
        return {
            "chosen_k": self.chosen_k,
            "bic_curve": [[k, b] for k, b in self.bic_curve],
            "final_loglik": self.final_loglik,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "reduced_dim": self.reduced_dim,
            "n_samples": self.n_samples,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FitReport":
        return cls(
            chosen_k=obj["chosen_k"],
            bic_curve=tuple((int(k), float(b)) for k, b in obj["bic_curve"]),
            final_loglik=obj["final_loglik"],
            iterations_used=obj["iterations_used"],
            converged=obj["converged"],
            reduced_dim=obj.get("reduced_dim"),
            n_samples=obj.get("n_samples", 0),
        )


@dataclass(frozen=True)
class EMFit:
    """Best-of-restarts EM result with the winning run's log-likelihood curve."""

    model: MixtureModel
    final_loglik: float
    loglik_curve: tuple[float, ...]
    restart_logliks: tuple[float, ...]
    iterations: int
    converged: bool


def _kmeans_pp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    sq_dist = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = sq_dist.sum()
        if total <= 0:
            centers[j:] = x[rng.integers(n, size=k - j)]
            break
        centers[j] = x[rng.choice(n, p=sq_dist / total)]
        sq_dist = np.minimum(sq_dist, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def _kmeans(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding plus a few Lloyd iterations; returns labels."""
    centers = _kmeans_pp_centers(x, k, rng)
    labels = np.zeros(x.shape[0], dtype=np.int64)
    for _ in range(KMEANS_ITERATIONS):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        for j in range(k):
            members = x[labels == j]
            if members.shape[0]:
                centers[j] = members.mean(axis=0)
    return labels


def _regularize_cov(cov: np.ndarray, eps: float, scale_floor: float) -> np.ndarray:
    d = cov.shape[0]
    add = eps * max(np.trace(cov) / d, scale_floor)
    return cov + add * np.eye(d)


def _m_step(
    x: np.ndarray, log_resp: np.ndarray, eps: float, scale_floor: float
) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray], np.ndarray]:
    resp = np.exp(log_resp)
    nk = resp.sum(axis=0)
    weights = nk / x.shape[0]
    means, covs = [], []
    for j in range(resp.shape[1]):
        r = resp[:, j]
        mu = r @ x / nk[j]
        dev = x - mu
        cov = (dev.T * r) @ dev / nk[j]
        cov = 0.5 * (cov + cov.T)
        means.append(mu)
        covs.append(_regularize_cov(cov, eps, scale_floor))
    return weights, means, covs, nk


def _log_densities(
    x: np.ndarray, weights: np.ndarray, means, covs
) -> np.ndarray:
    cols = []
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    for w, mu, cov in zip(log_w, means, covs):
        cols.append(w + gaussian_logpdf(Gaussian(mu, cov), x))
    return np.stack(cols, axis=1)


def _em_single(
    x: np.ndarray, k: int, cfg: FitConfig, rng: np.random.Generator
) -> EMFit:
    n, d = x.shape
    scale_floor = 1e-12 * max(1.0, float(np.var(x)))
    labels = _kmeans(x, k, rng)
    # responsibilities from the hard assignment seed the first M-step
    log_resp = np.full((n, k), -np.inf)
    log_resp[np.arange(n), labels] = 0.0
    # guard against empty initial clusters
    for j in range(k):
        if not np.any(labels == j):
            log_resp[rng.integers(n), :] = -np.inf
            log_resp[rng.integers(n), j] = 0.0
    weights, means, covs, _ = _m_step(x, log_resp, cfg.reg_epsilon, scale_floor)

    curve: list[float] = []
    converged = False
    reseeded = False
    for _ in range(cfg.max_iterations):
        joint = _log_densities(x, weights, means, covs)
        norm = logsumexp(joint, axis=1)
        loglik = float(norm.sum())
        curve.append(loglik)
        log_resp = joint - norm[:, None]
        weights, means, covs, nk = _m_step(x, log_resp, cfg.reg_epsilon, scale_floor)
        if np.any(nk < EMPTY_COMPONENT_FRACTION * n):
            if reseeded:
                raise FitError(f"EM restart degenerate for k={k}")
            reseeded = True
            worst = int(np.argmin(norm))
            for j in np.flatnonzero(nk < EMPTY_COMPONENT_FRACTION * n):
                means[j] = x[worst].copy()
                covs[j] = _regularize_cov(
                    np.diag(np.full(d, max(float(np.var(x)), scale_floor))),
                    cfg.reg_epsilon,
                    scale_floor,
                )
                weights[j] = 1.0 / n
            weights = weights / weights.sum()
            continue
        if len(curve) >= 2:
            prev = curve[-2]
            if abs(loglik - prev) / max(1.0, abs(loglik)) < cfg.loglik_tolerance:
                converged = True
                break
    joint = _log_densities(x, weights, means, covs)
    final_loglik = float(logsumexp(joint, axis=1).sum())
    curve.append(final_loglik)
    model = MixtureModel(
        weights / weights.sum(),
        tuple(Gaussian(mu, cov) for mu, cov in zip(means, covs)),
    )
    return EMFit(
        model=model,
        final_loglik=final_loglik,
        loglik_curve=tuple(curve),
        restart_logliks=(final_loglik,),
        iterations=len(curve) - 1,
        converged=converged,
    )


def em_fit(
    samples: np.ndarray, k: int, cfg: FitConfig, stream_key: tuple[int, ...] = ()
) -> EMFit:
    """Best of cfg.restarts EM runs by final log-likelihood.

    ``stream_key`` extends the RNG derivation (e.g. with class id) so
    parallel per-class fits stay deterministic.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("samples must be an N x D matrix")
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite values in samples")
    n = x.shape[0]
    if n < 2:
        raise ValidationError("at least 2 samples required")
    if n < k:
        raise ValidationError(f"cannot fit k={k} components to {n} samples")

    if k == 1:
        # closed-form M-step: empirical moments plus diagonal regularization
        g = empirical_moments(x)
        scale_floor = 1e-12 * max(1.0, float(np.var(x)))
        cov = _regularize_cov(np.asarray(g.cov), cfg.reg_epsilon, scale_floor)
        model = MixtureModel.single(Gaussian(g.mean, cov))
        loglik = float(mixture_logpdf(model, x).sum())
        return EMFit(model, loglik, (loglik,), (loglik,), 1, True)

    best: EMFit | None = None
    finals: list[float] = []
    for r in range(cfg.restarts):
        rng = substream(cfg.seed, *stream_key, k, r)
        try:
            run = _em_single(x, k, cfg, rng)
        except FitError:
            finals.append(-np.inf)
            continue
        finals.append(run.final_loglik)
        if best is None or run.final_loglik > best.final_loglik:
            best = run
    if best is None:
        raise FitError(f"all {cfg.restarts} EM restarts degenerate for k={k}")
    return EMFit(
        model=best.model,
        final_loglik=best.final_loglik,
        loglik_curve=best.loglik_curve,
        restart_logliks=tuple(finals),
        iterations=best.iterations,
        converged=best.converged,
    )


def bic_score(m: MixtureModel, samples: np.ndarray) -> float:
    """p ln(N) - 2 L with full-covariance parameter count
    p = (K-1) + K D + K D(D+1)/2."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.dim:
        raise ValidationError("sample dimension does not match mixture")
    n, d = x.shape
    k = m.n_components
    p = (k - 1) + k * d + k * d * (d + 1) // 2
    loglik = mixture_logpdf(m, x)
    if not np.all(np.isfinite(loglik)):
        return np.inf
    return p * np.log(n) - 2.0 * float(loglik.sum())


def select_components(
    samples: np.ndarray, cfg: FitConfig, stream_key: tuple[int, ...] = ()
) -> tuple[MixtureModel, FitReport]:
    """BIC sweep over k_min..k_max, then a final fit with the winning count.

    When D exceeds cfg.reduce_dim the sweep runs in a plain-PCA reduction of
    the samples; the final model is always refit in the original space.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < max(2, cfg.k_min):
        raise ValidationError("not enough samples for the configured k range")
    n, d = x.shape

    reduced_dim = None
    sweep_x = x
    if d > cfg.reduce_dim:
        reduced_dim = cfg.reduce_dim
        proj, mean = pca(x, cfg.reduce_dim)
        sweep_x = project_samples(x, proj, center=mean)

    curve: list[tuple[int, float]] = []
    for k in range(cfg.k_min, cfg.k_max + 1):
        if k > n:
            curve.append((k, np.inf))
            continue
        try:
            run = em_fit(sweep_x, k, cfg, stream_key=(*stream_key, 0))
            curve.append((k, bic_score(run.model, sweep_x)))
        except (FitError, ValidationError):
            curve.append((k, np.inf))
    bics = np.array([b for _, b in curve])
    if not np.any(np.isfinite(bics)):
        raise FitError("every component count in the range failed to fit")
    chosen_k = curve[int(np.argmin(bics))][0]

    final = em_fit(x, chosen_k, cfg, stream_key=(*stream_key, 1))
    report = FitReport(
        chosen_k=chosen_k,
        bic_curve=tuple(curve),
        final_loglik=final.final_loglik,
        iterations_used=final.iterations,
        converged=final.converged,
        reduced_dim=reduced_dim,
        n_samples=n,
    )
    return final.model, report


@dataclass(frozen=True)
class ClassFit:
    class_id: int
    name: str
    n_samples: int
    model: MixtureModel | None
    report: FitReport | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.model is None


def fit_labeled(dataset: LabeledDataset, cfg: FitConfig) -> list[ClassFit]:
    """One independent mixture per distinct label; failures are recorded per
    class without aborting the others."""
    results: list[ClassFit] = []
    for ci, name in enumerate(dataset.label_names):
        x = dataset.class_samples(ci)
        try:
            model, report = select_components(x, cfg, stream_key=(ci,))
            results.append(ClassFit(ci, name, x.shape[0], model, report))
        except (FitError, ValidationError) as exc:
            results.append(ClassFit(ci, name, x.shape[0], None, None, str(exc)))
    return results
