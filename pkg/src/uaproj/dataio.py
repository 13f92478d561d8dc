"""CSV ingestion and JSON persistence for models, projections, and reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .fitting import ClassFit
from .model import MixtureModel, ProjectionMatrix


def load_csv(path: str | Path, label_column: str) -> "LabeledDataset":
    """Load a UTF-8 CSV with a header row into a labeled dataset.

    Labels are mapped to dense integer ids in first-appearance order. Rows
    with non-numeric feature cells are rejected with a row-numbered message.
    """
    from .model import LabeledDataset

    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if label_column not in header:
            raise ValidationError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
        feature_idx = [i for i in range(len(header)) if i != label_idx]

        rows: list[list[float]] = []
        labels: list[int] = []
        label_ids: dict[str, int] = {}
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            try:
                rows.append([float(row[i]) for i in feature_idx])
            except ValueError:
                raise ValidationError(
                    f"{path}: row {row_no} contains a non-numeric feature value"
                ) from None
            label = row[label_idx]
            labels.append(label_ids.setdefault(label, len(label_ids)))
    if not rows:
        raise ValidationError(f"{path}: zero usable rows")
    return LabeledDataset(
        np.asarray(rows, dtype=np.float64),
        np.asarray(labels, dtype=np.int64),
        tuple(label_ids),
    )


def write_json(obj: dict, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def read_json(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def save_class_fits(fits: list[ClassFit], out_dir: str | Path, seed: int) -> Path:
    """Per-class model and report files plus an index listing them."""
    out_dir = Path(out_dir)
    entries = []
    for fit in fits:
        entry: dict = {
            "class_id": fit.class_id,
            "name": fit.name,
            "n_samples": fit.n_samples,
        }
        if fit.failed:
            entry["error"] = fit.error
        else:
            model_file = f"{fit.class_id:03d}_{fit.name}.model.json"
            report_file = f"{fit.class_id:03d}_{fit.name}.report.json"
            write_json(fit.model.to_json(), out_dir / model_file)
            write_json(fit.report.to_json(), out_dir / report_file)
            entry["model"] = model_file
            entry["report"] = report_file
        entries.append(entry)
    index_path = out_dir / "models.json"
    write_json({"seed": seed, "classes": entries}, index_path)
    return index_path


def load_class_models(
    index_path: str | Path,
) -> tuple[list[int], list[str], list[MixtureModel], list[int]]:
    """Read a model index; returns (class_ids, names, models, sample_counts)."""
    index_path = Path(index_path)
    index = read_json(index_path)
    ids, names, models, counts = [], [], [], []
    for entry in index.get("classes", []):
        if "model" not in entry:
            continue
        ids.append(int(entry["class_id"]))
        names.append(str(entry["name"]))
        models.append(MixtureModel.from_json(read_json(index_path.parent / entry["model"])))
        counts.append(int(entry.get("n_samples", 0)))
    if not models:
        raise ValidationError(f"{index_path}: no fitted class models")
    return ids, names, models, counts


def save_projection(p: ProjectionMatrix, path: str | Path, seed: int) -> None:
    obj = p.to_json()
    obj["seed"] = seed
    write_json(obj, path)


def load_projection(path: str | Path) -> ProjectionMatrix:
    return ProjectionMatrix.from_json(read_json(path))
