"""Rasterization of 2D mixture densities and highest-density contour lines.

Contour levels follow the sort/cumulate scheme: flatten the normalized grid,
sort densities descending, accumulate mass until the target fraction rho is
covered, and take the density at that point as the level threshold. The
threshold superlevel set is then traced as smooth isolines with marching
squares (edge-interpolated, via skimage).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage import measure

from .errors import ValidationError
from .model import DensityGrid, MixtureModel, mixture_pdf
from .moments import aggregate_mixture

DEFAULT_RHOS = (0.25, 0.50, 0.95)
DEFAULT_RESOLUTION = (512, 512)
# Grid extent when no bounds are given: aggregate mean +/- this many
# aggregated standard deviations per axis.
BOUNDS_SIGMA = 4.0


@dataclass(frozen=True)
class ContourLevelSet:
    """Isolines enclosing probability mass rho at one density threshold.

    Polyline vertices are in projected-data units. Closed curves repeat
    their first vertex; open curves only occur where the level set leaves
    the grid.
    """

    rho: float
    threshold: float
    polylines: tuple[np.ndarray, ...]

    def to_json(self) -> dict:
        return {
            "rho": self.rho,
            "threshold": self.threshold,
            "polylines": [poly.tolist() for poly in self.polylines],
        }


def default_bounds(m: MixtureModel, n_sigma: float = BOUNDS_SIGMA) -> tuple[float, float, float, float]:
    agg = aggregate_mixture(m)
    sx, sy = np.sqrt(np.maximum(np.diag(agg.cov_hat), 0.0))
    cx, cy = agg.mean_hat
    # degenerate axes still need a nonzero extent to raster
    sx = max(sx, 1e-6 * max(1.0, abs(cx)))
    sy = max(sy, 1e-6 * max(1.0, abs(cy)))
    return (cx - n_sigma * sx, cx + n_sigma * sx, cy - n_sigma * sy, cy + n_sigma * sy)


def rasterize(
    m: MixtureModel,
    bounds: tuple[float, float, float, float] | None = None,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
) -> DensityGrid:
    """Evaluate the mixture density at cell centers and normalize to unit mass."""
    if m.dim != 2:
        raise ValidationError("rasterize requires a 2D mixture")
    nx, ny = int(resolution[0]), int(resolution[1])
    if nx < 1 or ny < 1:
        raise ValidationError("resolution must be positive")
    if bounds is None:
        bounds = default_bounds(m)
    xmin, xmax, ymin, ymax = map(float, bounds)
    if not (xmax > xmin and ymax > ymin):
        raise ValidationError("degenerate raster bounds")
    dx = (xmax - xmin) / nx
    dy = (ymax - ymin) / ny
    xs = xmin + dx * (np.arange(nx) + 0.5)
    ys = ymin + dy * (np.arange(ny) + 0.5)
    pts = np.column_stack(
        [np.repeat(xs, ny), np.tile(ys, nx)]
    )
    values = np.asarray(mixture_pdf(m, pts)).reshape(nx, ny)
    grid = DensityGrid((xs[0], ys[0]), (dx, dy), values)
    return grid.normalized()


def _require_normalized(grid: DensityGrid) -> None:
    if abs(grid.total_mass - 1.0) > 1e-6:
        raise ValidationError("grid must be normalized to unit mass")


def hdr_thresholds(
    grid: DensityGrid, rhos: tuple[float, ...] | list[float]
) -> list[tuple[float, float]]:
    """Density thresholds whose superlevel sets enclose mass rho.

    Sort densities descending, accumulate cell masses, and return the density
    of the first cell at which the cumulative mass reaches rho. Thresholds are
    non-increasing in rho.
    """
    if len(rhos) == 0:
        raise ValidationError("at least one rho required")
    for rho in rhos:
        if not 0.0 < rho <= 1.0:
            raise ValidationError(f"rho={rho} outside (0, 1]")
    _require_normalized(grid)
    flat = np.sort(grid.values.ravel())[::-1]
    cdf = np.cumsum(flat) * grid.cell_area
    out = []
    for rho in rhos:
        idx = int(np.searchsorted(cdf, rho - 1e-12))
        idx = min(idx, flat.size - 1)
        out.append((float(rho), float(flat[idx])))
    return out


def extract_isolines(grid: DensityGrid, threshold: float) -> list[np.ndarray]:
    """Marching-squares isolines at a density value, in data coordinates."""
    if threshold < 0:
        raise ValidationError("threshold must be non-negative")
    values = grid.values
    if threshold > values.max():
        return []
    contours = measure.find_contours(values, threshold)
    ox, oy = grid.origin
    dx, dy = grid.spacing
    out = []
    for c in contours:
        poly = np.empty_like(c)
        poly[:, 0] = ox + c[:, 0] * dx
        poly[:, 1] = oy + c[:, 1] * dy
        out.append(poly)
    return out


def contour_set(
    m: MixtureModel,
    rhos: tuple[float, ...] | list[float] = DEFAULT_RHOS,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
    bounds: tuple[float, float, float, float] | None = None,
) -> list[ContourLevelSet]:
    """rasterize -> hdr_thresholds -> extract_isolines for each rho."""
    grid = rasterize(m, bounds=bounds, resolution=resolution)
    levels = hdr_thresholds(grid, rhos)
    return [
        ContourLevelSet(rho, thr, tuple(extract_isolines(grid, thr)))
        for rho, thr in levels
    ]


def contours_to_json(class_id: int, levels: list[ContourLevelSet]) -> dict:
    return {"class_id": class_id, "levels": [lvl.to_json() for lvl in levels]}
