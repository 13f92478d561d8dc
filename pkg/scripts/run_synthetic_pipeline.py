#!/usr/bin/env python3
"""End-to-end demo on a synthetic multimodal dataset.

Generates a labeled two-class dataset with bimodal structure, then runs the
full CLI pipeline (fit -> project -> contours -> evaluate) in one process and
leaves all artifacts, including an SVG contour plot, in the output directory.

Usage:
    python3 scripts/run_synthetic_pipeline.py --out out/demo --seed 0
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from uaproj.cli import main as cli


def write_dataset(path: Path, seed: int) -> None:
    from uaproj import make_synthetic_multimodal

    specs = [
        (
            [np.zeros(4), np.r_[10.0, np.zeros(3)]],
            [np.eye(4), np.eye(4)],
            [0.5, 0.5],
        ),
        (
            [np.r_[0.0, 8.0, 0.0, 0.0], np.r_[10.0, 8.0, 0.0, 0.0]],
            [np.eye(4), np.eye(4)],
            [0.5, 0.5],
        ),
        ([np.r_[5.0, 4.0, 6.0, 0.0]], [2.0 * np.eye(4)], [1.0]),
    ]
    dataset, _ = make_synthetic_multimodal(
        specs, [4000, 4000, 1000], seed=seed, names=("left", "right", "blob")
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(dataset.dim)] + ["label"])
        for row, lab in zip(dataset.samples, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [dataset.label_names[lab]])


def run(args: list[str]) -> None:
    print("$ uaproj " + " ".join(args))
    cli.main(args=args, standalone_mode=False)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/demo"))
    ap.add_argument("--seed", type=int, default=0)
    opts = ap.parse_args()
    out = opts.out
    out.mkdir(parents=True, exist_ok=True)

    csv_path = out / "dataset.csv"
    write_dataset(csv_path, opts.seed)
    print(f"wrote {csv_path}")

    run(["fit", "--input", str(csv_path), "--label-column", "label",
         "--kmin", "1", "--kmax", "4", "--restarts", "3",
         "--seed", str(opts.seed), "--out", str(out / "models")])
    run(["project", "--models", str(out / "models" / "models.json"),
         "--tau", "samples", "--seed", str(opts.seed), "--out", str(out / "proj")])
    run(["contours", "--models", str(out / "proj" / "projected_models.json"),
         "--svg", str(out / "contours.svg"), "--out", str(out / "contours")])
    run(["evaluate", "--input", str(csv_path), "--label-column", "label",
         "--models", str(out / "models" / "models.json"),
         "--seed", str(opts.seed), "--out", str(out / "eval")])


if __name__ == "__main__":
    main()
