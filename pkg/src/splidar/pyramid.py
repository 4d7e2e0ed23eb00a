"""Same-lattice multiscale aggregation of histogram cubes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sim import HistogramCube


class InvalidScaleError(ValueError):
    """Requested aggregation window does not fit inside the image."""


def scale_radius(level: int) -> int:
    """Spatial window radius at a given scale: 0, 1, 3, 7, ... (dyadic growth)."""
    return 2 ** (level - 1) - 1


@dataclass
class MultiscalePyramid:
    """Per-scale spatially aggregated cubes, all on the input's H×W lattice.

    levels[0] is the input itself; levels[l] sums counts over a
    (2·scale_radii[l]+1)² window around each pixel, clipped at the image
    border so no counts are invented.
    """

    levels: list[np.ndarray]
    scale_radii: list[int]

    @property
    def n_scales(self) -> int:
        return len(self.levels)


def _box_sum(counts: np.ndarray, radius: int) -> np.ndarray:
    """Clipped-window box sum over the two leading (spatial) axes."""
    h, w, t = counts.shape
    # zero-padded 2-D prefix sums: integral[i, j] = sum of counts[:i, :j]
    integral = np.zeros((h + 1, w + 1, t), dtype=np.int64)
    np.cumsum(counts, axis=0, out=integral[1:, 1:])
    np.cumsum(integral[1:, 1:], axis=1, out=integral[1:, 1:])
    ii = np.arange(h)
    jj = np.arange(w)
    lo_i = np.maximum(ii - radius, 0)
    hi_i = np.minimum(ii + radius, h - 1) + 1
    lo_j = np.maximum(jj - radius, 0)
    hi_j = np.minimum(jj + radius, w - 1) + 1
    return (integral[hi_i[:, None], hi_j[None, :]]
            - integral[lo_i[:, None], hi_j[None, :]]
            - integral[hi_i[:, None], lo_j[None, :]]
            + integral[lo_i[:, None], lo_j[None, :]])


def build_pyramid(cube: HistogramCube, n_scales: int) -> MultiscalePyramid:
    """Aggregate the cube at n_scales dyadic window sizes (1×1, 3×3, 7×7, ...)."""
    if n_scales < 1:
        raise InvalidScaleError("need at least one scale")
    h, w, _ = cube.shape
    radii = [scale_radius(level) for level in range(1, n_scales + 1)]
    widest = 2 * radii[-1] + 1
    if widest > min(h, w):
        raise InvalidScaleError(
            f"scale {n_scales} needs a {widest}×{widest} window, image is {h}×{w}")
    counts = cube.counts
    levels = [counts.copy()]
    levels += [_box_sum(counts, a) for a in radii[1:]]
    return MultiscalePyramid(levels=levels, scale_radii=radii)
