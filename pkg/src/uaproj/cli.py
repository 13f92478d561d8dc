"""Command-line pipeline: fit, project, contours, evaluate, sample, serve.

Exit codes: 0 success, 2 validation error, 3 numerical failure. Errors are
emitted as one JSON object on stderr.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import dataio
from .contours import contour_set, contours_to_json
from .errors import NumericalError, ValidationError
from .fitting import FitConfig, fit_labeled
from .metrics import EvalConfig, evaluate_strategies
from .model import ImportanceWeights, MixtureModel
from .moments import aggregate_mixture
from .projection import (
    build_weighted_moments,
    project_mixture,
    projection_from_ua,
)
from .sampling import AnalyticSpec, sample_analytic, sample_mixture, substream


def _fail(code: int, kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            _fail(2, "validation", str(exc))
        except NumericalError as exc:
            _fail(3, "numerical", str(exc))

    return wrapper


def parse_tau(spec: str, counts: list[int]) -> ImportanceWeights:
    if spec == "equal":
        return ImportanceWeights.equal(len(counts))
    if spec == "samples":
        return ImportanceWeights.from_counts(counts)
    try:
        raw = [float(v) for v in spec.split(",")]
    except ValueError:
        raise ValidationError(
            f"--tau must be 'equal', 'samples', or a comma list, got {spec!r}"
        ) from None
    if len(raw) != len(counts):
        raise ValidationError(
            f"--tau lists {len(raw)} weights for {len(counts)} classes"
        )
    return ImportanceWeights.normalized(raw)


def _parse_rhos(spec: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in spec.split(","))
    except ValueError:
        raise ValidationError(f"--rhos must be a comma list, got {spec!r}") from None


@click.group()
def main():
    """Uncertainty-aware projection of mixture-modeled data."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--label-column", required=True)
@click.option("--kmin", default=1, show_default=True)
@click.option("--kmax", default=30, show_default=True)
@click.option("--restarts", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@handle_errors
def fit(input_path, label_column, kmin, kmax, restarts, seed, out_dir):
    """Fit one mixture per class and write per-class model + report JSON."""
    dataset = dataio.load_csv(input_path, label_column)
    cfg = FitConfig(k_min=kmin, k_max=kmax, restarts=restarts, seed=seed)
    fits = fit_labeled(dataset, cfg)
    index = dataio.save_class_fits(fits, out_dir, seed)
    failed = [f.name for f in fits if f.failed]
    click.echo(f"wrote {index}")
    if failed:
        click.echo(f"failed classes: {', '.join(failed)}")
    if all(f.failed for f in fits):
        raise NumericalError("every class failed to fit")


@main.command()
@click.option("--models", "models_path", required=True, type=click.Path())
@click.option("--tau", default="samples", show_default=True)
@click.option("--d", default=2, show_default=True)
@click.option("--center", is_flag=True, help="center projected means by P^T mu_bar")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@handle_errors
def project(models_path, tau, d, center, seed, out_dir):
    """Build the weighted projection and write it plus the projected models."""
    ids, names, models, counts = dataio.load_class_models(models_path)
    weights = parse_tau(tau, counts)
    moments = [aggregate_mixture(m) for m in models]
    wms = build_weighted_moments(moments, weights, class_ids=ids)
    p = projection_from_ua(wms, d)
    out_dir = Path(out_dir)
    dataio.save_projection(p, out_dir / "projection.json", seed)

    shift = (p.basis.T @ wms.mean_bar) if center else None
    entries = []
    for cid, name, m in zip(ids, names, models):
        pm = project_mixture(m, p)
        if shift is not None:
            pm = MixtureModel(
                pm.weights,
                tuple(
                    type(g)(g.mean - shift, g.cov) for g in pm.gaussians
                ),
            )
        entries.append(
            {"class_id": cid, "name": name, "model": pm.to_json()}
        )
    dataio.write_json(
        {
            "seed": seed,
            "tau": weights.tau.tolist(),
            "centered": bool(center),
            "projection": "projection.json",
            "classes": entries,
        },
        out_dir / "projected_models.json",
    )
    click.echo(f"wrote {out_dir / 'projection.json'}")
    click.echo(f"wrote {out_dir / 'projected_models.json'}")


@main.command()
@click.option("--models", "models_path", required=True, type=click.Path(),
              help="projected_models.json from the project command")
@click.option("--rhos", default="0.25,0.5,0.95", show_default=True)
@click.option("--resolution", default=512, show_default=True)
@click.option("--svg", "svg_path", default=None, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@handle_errors
def contours(models_path, rhos, resolution, svg_path, out_dir):
    """Extract highest-density contour polylines for each projected class."""
    obj = dataio.read_json(models_path)
    rho_list = _parse_rhos(rhos)
    out_dir = Path(out_dir)
    payloads = []
    for entry in obj.get("classes", []):
        m = MixtureModel.from_json(entry["model"])
        levels = contour_set(m, rhos=rho_list, resolution=(resolution, resolution))
        payload = contours_to_json(entry["class_id"], levels)
        payload["name"] = entry.get("name", str(entry["class_id"]))
        payloads.append(payload)
        path = out_dir / f"contours_{entry['class_id']:03d}.json"
        dataio.write_json(payload, path)
        click.echo(f"wrote {path}")
    if not payloads:
        raise ValidationError(f"{models_path}: no projected class models")
    if svg_path:
        _write_svg(payloads, svg_path)
        click.echo(f"wrote {svg_path}")


def _write_svg(payloads: list[dict], path: str, size: int = 640) -> None:
    pts = [
        v
        for pl in payloads
        for lvl in pl["levels"]
        for poly in lvl["polylines"]
        for v in poly
    ]
    if not pts:
        raise ValidationError("no contour geometry to draw")
    arr = np.asarray(pts)
    lo, hi = arr.min(axis=0), arr.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    scale = (size - 40) / span.max()

    def to_px(v):
        return (20 + (v[0] - lo[0]) * scale, size - 20 - (v[1] - lo[1]) * scale)

    hues = [210, 0, 120, 40, 280, 170, 320, 80, 240, 20]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">'
    ]
    for ci, pl in enumerate(payloads):
        hue = hues[ci % len(hues)]
        for lvl in pl["levels"]:
            light = 30 + 45 * lvl["rho"]
            for poly in lvl["polylines"]:
                d = " ".join(
                    f"{'M' if i == 0 else 'L'}{x:.2f},{y:.2f}"
                    for i, (x, y) in enumerate(to_px(v) for v in poly)
                )
                parts.append(
                    f'<path d="{d}" fill="none" '
                    f'stroke="hsl({hue},70%,{light:.0f}%)" stroke-width="1.5"/>'
                )
    parts.append("</svg>")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(parts), encoding="utf-8")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--label-column", required=True)
@click.option("--models", "models_path", required=True, type=click.Path())
@click.option("--tau", default="samples", show_default=True)
@click.option("--resolution", default=256, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@handle_errors
def evaluate(input_path, label_column, models_path, tau, resolution, seed, out_dir):
    """Compare mixture projection and Gaussian surrogate against a KDE reference."""
    dataset = dataio.load_csv(input_path, label_column)
    ids, names, models, counts = dataio.load_class_models(models_path)
    if sorted(ids) != list(range(dataset.n_classes)):
        raise ValidationError("model index does not cover every dataset class")
    weights = parse_tau(tau, counts)
    cfg = EvalConfig(resolution=(resolution, resolution), seed=seed)
    report = evaluate_strategies(
        dataset, {c: m for c, m in zip(ids, models)}, weights, cfg
    )
    out_dir = Path(out_dir)
    obj = report.to_json()
    obj["seed"] = seed
    dataio.write_json(obj, out_dir / "metrics.json")
    table = report.to_table(list(dataset.label_names))
    (out_dir / "metrics.txt").write_text(table + "\n", encoding="utf-8")
    click.echo(table)


@main.command()
@click.option("--spec", "spec_path", default=None, type=click.Path(),
              help="analytic distribution spec JSON")
@click.option("--models", "models_path", default=None, type=click.Path(),
              help="model index to sample from instead of a spec")
@click.option("-n", "--n-samples", default=100_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def sample(spec_path, models_path, n_samples, seed, out_path):
    """Draw samples per class to a CSV with a trailing label column."""
    if (spec_path is None) == (models_path is None):
        raise ValidationError("provide exactly one of --spec or --models")
    if spec_path:
        spec = AnalyticSpec.load(spec_path)
        dataset = sample_analytic(spec, n_per_class=n_samples, seed=seed)
        samples, labels = dataset.samples, dataset.labels
        names = dataset.label_names
    else:
        ids, names, models, _ = dataio.load_class_models(models_path)
        blocks, labels_list = [], []
        for cid, m in zip(ids, models):
            blocks.append(sample_mixture(m, n_samples, substream(seed, cid)))
            labels_list.append(np.full(n_samples, cid))
        samples = np.vstack(blocks)
        labels = np.concatenate(labels_list)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        cols = [f"x{i}" for i in range(samples.shape[1])]
        fh.write(",".join(cols + ["label"]) + "\n")
        for row, lab in zip(samples, labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{names[lab]}\n")
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--port", default=8400, show_default=True)
@click.option("--bind", default="127.0.0.1", show_default=True)
@handle_errors
def serve(port, bind):
    """Start the interactive weight-steering HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=bind, port=port)


if __name__ == "__main__":
    main()
