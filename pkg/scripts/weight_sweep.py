#!/usr/bin/env python3
"""Sweep the importance weight of one class and report how the view changes.

For a fixed set of per-class mixtures, moves the focus class's weight from
equal weighting toward full emphasis (the remainder split evenly) and prints,
for each step, the angle between the emphasized projection plane and the
equal-weight plane plus the area of the focus class's rho=0.5 contour in the
projected view.

Usage:
    python3 scripts/weight_sweep.py --classes 4 --dim 8 --focus 0 --seed 1
"""

import argparse

import numpy as np

from uaproj import (
    ImportanceWeights,
    aggregate_mixture,
    build_weighted_moments,
    contour_set,
    project_mixture,
    projection_from_ua,
)


def random_mixture(rng, dim, k):
    comps = []
    for _ in range(k):
        a = rng.standard_normal((dim, dim))
        cov = a @ a.T / dim + 0.1 * np.eye(dim)
        comps.append((3.0 * rng.standard_normal(dim), 0.5 * (cov + cov.T)))
    w = rng.dirichlet(np.ones(k))
    from uaproj import Gaussian, MixtureModel

    return MixtureModel(w, tuple(Gaussian(m, c) for m, c in comps))


def polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def subspace_angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    s = np.linalg.svd(a.T @ b, compute_uv=False)
    return float(np.degrees(np.arccos(np.clip(s.min(), -1.0, 1.0))))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--classes", type=int, default=4)
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--focus", type=int, default=0)
    ap.add_argument("--seed", type=int, default=1)
    opts = ap.parse_args()

    rng = np.random.default_rng(opts.seed)
    models = [random_mixture(rng, opts.dim, 2) for _ in range(opts.classes)]
    moments = [aggregate_mixture(m) for m in models]

    def view(tau):
        wms = build_weighted_moments(moments, tau)
        p = projection_from_ua(wms, 2)
        projected = project_mixture(models[opts.focus], p)
        levels = contour_set(projected, rhos=(0.5,), resolution=(256, 256))
        area = sum(polygon_area(poly) for poly in levels[0].polylines)
        return p, area

    equal = ImportanceWeights.equal(opts.classes)
    base_p, base_area = view(equal)
    print(f"focus class {opts.focus}, equal weighting: "
          f"rho=0.5 contour area {base_area:.3f}")
    print(f"{'focus weight':>12} {'plane angle (deg)':>18} {'contour area':>13}")
    for focus_w in (0.25, 0.4, 0.6, 0.8, 0.95):
        rest = (1.0 - focus_w) / (opts.classes - 1)
        tau = np.full(opts.classes, rest)
        tau[opts.focus] = focus_w
        p, area = view(ImportanceWeights(tau))
        angle = subspace_angle_deg(base_p.basis, p.basis)
        print(f"{focus_w:>12.2f} {angle:>18.2f} {area:>13.3f}")


if __name__ == "__main__":
    main()
