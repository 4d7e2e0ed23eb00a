"""Per-scale maximum-likelihood depth estimates and photon statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pyramid import MultiscalePyramid
from .scene import Irf

# Depth variance never drops below the quantization variance of a uniform
# sub-bin offset; keeps sigma2 positive even for a single-bin IRF.
MIN_DEPTH_VAR = 1.0 / 12.0


@dataclass
class MultiscaleEstimates:
    """Matched-filter depth, signal count, depth variance, and background
    rate per (scale, pixel), each of shape L×H×W."""

    d_ml: np.ndarray
    s_bar: np.ndarray
    sigma2: np.ndarray
    b_hat: np.ndarray

    @property
    def n_scales(self) -> int:
        return self.d_ml.shape[0]


def _correlate(hists: np.ndarray, g: np.ndarray, lead: int) -> np.ndarray:
    """c[..., t] = Σ_k hists[..., t + k − lead]·g[k], zero-padded beyond
    both ends of the time axis.

    With lead ≈ the IRF centroid the peak of c sits at the centroid of the
    return pulse.  Plain shifted accumulation in a fixed tap order: exact
    sums, so argmax ties are stable across platforms (FFT methods are not).
    """
    t_bins = hists.shape[-1]
    pad = np.zeros(hists.shape[:-1] + (t_bins + g.size - 1,), dtype=np.float64)
    pad[..., lead:lead + t_bins] = hists
    out = np.zeros(hists.shape, dtype=np.float64)
    for k in range(g.size):
        out += g[k] * pad[..., k:k + t_bins]
    return out


def _peak_subbin(corr: np.ndarray) -> np.ndarray:
    """First-maximum bin per histogram, refined by a 3-point parabola fit."""
    t_bins = corr.shape[-1]
    peak = np.argmax(corr, axis=-1)
    interior = (peak > 0) & (peak < t_bins - 1)
    pk = np.where(interior, peak, 1)  # safe gather index
    c0 = np.take_along_axis(corr, pk[..., None], axis=-1)[..., 0]
    cm = np.take_along_axis(corr, (pk - 1)[..., None], axis=-1)[..., 0]
    cp = np.take_along_axis(corr, (pk + 1)[..., None], axis=-1)[..., 0]
    denom = cm + cp - 2.0 * c0
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where((denom < 0.0) & interior, (cm - cp) / (2.0 * denom), 0.0)
    return peak + np.clip(delta, -0.5, 0.5)


def _centroid_lead(irf: Irf) -> tuple[int, float]:
    """Integer tap offset aligning the correlation peak with the pulse
    centroid, plus the sub-bin remainder to add back after refinement."""
    lead = int(round(irf.centroid))
    return lead, irf.centroid - lead


def matched_filter_depth(histogram: np.ndarray, irf: Irf) -> tuple[float, bool]:
    """Cross-correlation depth estimate for a single histogram.

    Returns (depth in bins, has_signal).  The depth is the first-reaching
    argmax over integer shifts of Σ_t y_t·g(t − shift), refined to sub-bin
    precision, and locates the IRF centroid of the return pulse; an
    all-zero histogram reports depth 0 with has_signal False.
    """
    y = np.asarray(histogram, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("histogram must be 1-D")
    if np.any(y < 0):
        raise ValueError("histogram counts must be nonnegative")
    has_signal = bool(y.sum() > 0)
    if not has_signal:
        return 0.0, False
    lead, rem = _centroid_lead(irf)
    corr = _correlate(y[None, :], irf.samples, lead)[0]
    depth = float(_peak_subbin(corr[None, :])[0]) + rem
    return float(np.clip(depth, 0.0, y.size - 1)), True


def estimate_background(histogram: np.ndarray) -> float:
    """Median bin count: the signal occupies few bins, so the median is
    background-dominated."""
    y = np.asarray(histogram, dtype=np.float64)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("histogram must be 1-D with at least two bins")
    return float(np.median(y))


def peak_window_halfwidth(irf: Irf) -> int:
    """Half-width of the signal integration window: ceil(3·sigma_g) bins."""
    return int(math.ceil(3.0 * irf.rms_width))


def _signal_stats_block(hists: np.ndarray, irf: Irf, d_ml: np.ndarray,
                        b_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (s_bar, sigma2) over histograms stacked on leading axes."""
    t_bins = hists.shape[-1]
    half = peak_window_halfwidth(irf)
    center = np.clip(np.floor(d_ml + 0.5).astype(np.int64), 0, t_bins - 1)
    lo = np.maximum(center - half, 0)
    hi = np.minimum(center + half, t_bins - 1)
    csum = np.zeros(hists.shape[:-1] + (t_bins + 1,), dtype=np.float64)
    np.cumsum(hists, axis=-1, out=csum[..., 1:])
    wsum = (np.take_along_axis(csum, (hi + 1)[..., None], axis=-1)
            - np.take_along_axis(csum, lo[..., None], axis=-1))[..., 0]
    wlen = (hi - lo + 1).astype(np.float64)
    s_bar = np.maximum(wsum - wlen * b_hat, 0.0)
    var = max(irf.rms_width**2, MIN_DEPTH_VAR)
    sigma2 = var / np.maximum(s_bar, 1.0)
    return s_bar, sigma2


def signal_stats(histogram: np.ndarray, irf: Irf, d_ml: float,
                 b_hat: float) -> tuple[float, float]:
    """Background-subtracted photon count in the peak window, and the
    resulting depth variance sigma_g²/max(s̄, 1)."""
    y = np.asarray(histogram, dtype=np.float64)
    if not 0 <= d_ml < y.size:
        raise ValueError("d_ml must lie within the histogram")
    s, v = _signal_stats_block(y[None, :], irf, np.array([d_ml]), np.array([b_hat]))
    return float(s[0]), float(v[0])


def reflectivity_mode(s_bar):
    """Posterior-mode reflectivity: the mode of Gamma(1 + s̄, scale 1) is s̄."""
    return np.maximum(np.asarray(s_bar, dtype=np.float64), 0.0)


def estimate_all(pyramid: MultiscalePyramid, irf: Irf) -> MultiscaleEstimates:
    """Matched-filter depth, background, and signal stats at every scale.

    Pixels whose aggregated histogram is empty get d_ml=0, s_bar=0 and the
    prior-width variance floor.
    """
    shapes = pyramid.levels[0].shape
    n_scales = pyramid.n_scales
    h, w, _ = shapes
    d_ml = np.zeros((n_scales, h, w))
    s_bar = np.zeros((n_scales, h, w))
    sigma2 = np.zeros((n_scales, h, w))
    b_hat = np.zeros((n_scales, h, w))
    lead, rem = _centroid_lead(irf)
    for lvl, counts in enumerate(pyramid.levels):
        y = counts.astype(np.float64)
        corr = _correlate(y, irf.samples, lead)
        depth = np.clip(_peak_subbin(corr) + rem, 0.0, y.shape[-1] - 1)
        empty = y.sum(axis=-1) == 0
        depth[empty] = 0.0
        bg = np.median(y, axis=-1)
        s, v = _signal_stats_block(y, irf, depth, bg)
        d_ml[lvl], s_bar[lvl], sigma2[lvl], b_hat[lvl] = depth, s, v, bg
    return MultiscaleEstimates(d_ml=d_ml, s_bar=s_bar, sigma2=sigma2, b_hat=b_hat)
