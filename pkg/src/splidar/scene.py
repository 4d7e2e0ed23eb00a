"""Ground-truth scenes, system impulse responses, and photon-level calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class CalibrationError(ValueError):
    """Raised when a scene cannot be scaled to the requested photon levels."""


@dataclass
class Irf:
    """Discretized system impulse response g(t).

    Samples are normalized to unit sum on construction, so a pixel with
    reflectivity r returns an expected r signal photons (minus whatever
    mass falls off the histogram edges).  ``rms_width`` is the discrete
    RMS width of the normalized samples about their centroid, in bins.
    """

    samples: np.ndarray
    centroid: float = field(init=False)
    rms_width: float = field(init=False)

    def __post_init__(self):
        g = np.asarray(self.samples, dtype=np.float64)
        if g.ndim != 1 or g.size == 0:
            raise ValueError("IRF must be a nonempty 1-D sample vector")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("IRF samples must be finite and nonnegative")
        total = float(g.sum())
        if total <= 0.0:
            raise ValueError("IRF must carry positive mass")
        g = g / total
        k = np.arange(g.size, dtype=np.float64)
        c = float(np.sum(k * g))
        self.samples = g
        self.centroid = c
        self.rms_width = float(math.sqrt(np.sum(g * (k - c) ** 2)))

    def __len__(self):
        return self.samples.size


def gaussian_irf(sigma: float, truncate: float = 4.0) -> Irf:
    """Gaussian pulse of nominal width ``sigma`` bins, truncated at ±truncate·sigma."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = int(math.ceil(truncate * sigma))
    k = np.arange(2 * half + 1, dtype=np.float64)
    return Irf(np.exp(-0.5 * ((k - half) / sigma) ** 2))


def delta_irf() -> Irf:
    """Single-bin pulse; useful for simulation sanity checks."""
    return Irf(np.array([1.0]))


def load_irf(path) -> Irf:
    """Read an IRF from a one-column text file of nonnegative reals."""
    samples = np.atleast_1d(np.loadtxt(path, dtype=np.float64))
    if samples.ndim != 1:
        raise ValueError(f"{path}: expected a single column of values")
    return Irf(samples)


@dataclass
class Scene:
    """Per-pixel ground truth for the Poisson observation model.

    depth is in time-bin units and must lie in [0, n_bins); reflectivity is
    the expected signal photon count of the pixel (the IRF has unit sum);
    background is a per-bin ambient rate, constant over the time axis.
    """

    depth: np.ndarray
    reflectivity: np.ndarray
    background: np.ndarray
    n_bins: int

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=np.float64)
        self.reflectivity = np.asarray(self.reflectivity, dtype=np.float64)
        self.background = np.asarray(self.background, dtype=np.float64)
        if self.depth.ndim != 2 or min(self.depth.shape) < 1:
            raise ValueError("depth must be a nonempty H×W array")
        if (self.reflectivity.shape != self.depth.shape
                or self.background.shape != self.depth.shape):
            raise ValueError("reflectivity/background shapes must match depth")
        if int(self.n_bins) < 1:
            raise ValueError("n_bins must be >= 1")
        self.n_bins = int(self.n_bins)
        if np.any(self.depth < 0) or np.any(self.depth >= self.n_bins):
            raise ValueError("depths must lie in [0, n_bins)")
        if np.any(self.reflectivity < 0):
            raise ValueError("reflectivity must be nonnegative")
        if np.any(self.background < 0):
            raise ValueError("background must be nonnegative")

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]


def ppp_sbr(scene: Scene) -> tuple[float, float]:
    """Evaluate the scene's photons-per-pixel and signal-to-background ratio.

    PPP = (1/N)·Σ(r_n + b_n·T) and SBR = Σr_n / Σ(b_n·T).  SBR is inf for a
    background-free scene.
    """
    t = scene.n_bins
    ppp = float(np.mean(scene.reflectivity + scene.background * t))
    total_bg = float(np.sum(scene.background)) * t
    total_sig = float(np.sum(scene.reflectivity))
    sbr = math.inf if total_bg == 0.0 else total_sig / total_bg
    return ppp, sbr


def calibrate_levels(scene: Scene, ppp: float, sbr: float) -> Scene:
    """Rescale reflectivity and set a uniform background to hit (ppp, sbr) exactly.

    The mean signal per pixel must equal ppp·sbr/(1+sbr) and the uniform
    per-bin background ppp/((1+sbr)·T); substituting back into the PPP/SBR
    definitions recovers the targets identically.
    """
    if ppp <= 0 or sbr <= 0:
        raise ValueError("ppp and sbr must be positive")
    mean_r = float(np.mean(scene.reflectivity))
    if mean_r == 0.0:
        raise CalibrationError("cannot calibrate: scene reflectivity is all zero")
    target_mean_r = ppp * sbr / (1.0 + sbr)
    bg = ppp / ((1.0 + sbr) * scene.n_bins)
    return Scene(
        depth=scene.depth.copy(),
        reflectivity=scene.reflectivity * (target_mean_r / mean_r),
        background=np.full_like(scene.background, bg),
        n_bins=scene.n_bins,
    )


# ---------------------------------------------------------------------------
# Built-in synthetic scenes.  All start with unit reflectivity and zero
# background; calibrate_levels sets the actual photon budget.

def flat_scene(height=64, width=64, n_bins=256, depth_frac=0.5) -> Scene:
    depth = np.full((height, width), depth_frac * n_bins)
    return Scene(depth, np.ones_like(depth), np.zeros_like(depth), n_bins)


def step_scene(height=64, width=64, n_bins=256, low_frac=0.3, high_frac=0.7) -> Scene:
    """Two-level step edge: left half near, right half far."""
    depth = np.full((height, width), low_frac * n_bins)
    depth[:, width // 2:] = high_frac * n_bins
    return Scene(depth, np.ones_like(depth), np.zeros_like(depth), n_bins)


def staircase_scene(height=64, width=64, n_bins=256, n_steps=8) -> Scene:
    """n_steps depth plateaus spanning [0.2·T, 0.8·T] across the width."""
    col = np.arange(width)
    step = np.minimum(col * n_steps // width, n_steps - 1)
    frac = 0.2 + 0.6 * step / max(n_steps - 1, 1)
    depth = np.broadcast_to(frac * n_bins, (height, width)).copy()
    return Scene(depth, np.ones((height, width)), np.zeros((height, width)), n_bins)


def sphere_scene(height=64, width=64, n_bins=256) -> Scene:
    """Spherical cap bulging toward the sensor out of a flat backplane."""
    yy, xx = np.mgrid[0:height, 0:width]
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    radius = 0.4 * min(height, width)
    rho2 = (yy - cy) ** 2 + (xx - cx) ** 2
    cap = np.sqrt(np.maximum(radius**2 - rho2, 0.0)) / radius
    depth = (0.7 - 0.35 * cap) * n_bins
    return Scene(depth, np.ones((height, width)), np.zeros((height, width)), n_bins)


SYNTHETIC_SCENES = {
    "flat": flat_scene,
    "step": step_scene,
    "staircase": staircase_scene,
    "sphere": sphere_scene,
}


# ---------------------------------------------------------------------------
# Portable graymap depth input (P2/P5, 8 or 16 bit).

def _pgm_tokens(data: bytes):
    """Yield whitespace-separated tokens, skipping '#' comments; each token
    comes with the byte offset just past it."""
    pos = 0
    while True:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] not in (0x0A, 0x0D):
                pos += 1
            continue
        if pos == len(data):
            return
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        yield data[start:pos].decode("ascii"), pos


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a P2/P5 portable graymap; returns (H×W int array, maxval)."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
        if magic not in ("P2", "P5"):
            raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
        (w_tok, _), (h_tok, _), (max_tok, end) = (next(tokens), next(tokens),
                                                  next(tokens))
    except StopIteration:
        raise ValueError(f"{path}: truncated PGM header") from None
    width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    if not (0 < maxval < 65536):
        raise ValueError(f"{path}: maxval {maxval} out of range")
    if magic == "P2":
        vals = [int(tok) for tok, _ in _pgm_tokens(data[end:])]
        img = np.array(vals, dtype=np.int64)
    else:
        # single whitespace byte separates maxval from raw samples
        raw = data[end + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = height * width * dtype.itemsize
        if len(raw) < need:
            raise ValueError(f"{path}: raster has {len(raw)} bytes, expected {need}")
        img = np.frombuffer(raw[:need], dtype=dtype).astype(np.int64)
    if img.size != height * width:
        raise ValueError(f"{path}: {img.size} samples, expected {height * width}")
    if img.max(initial=0) > maxval:
        raise ValueError(f"{path}: sample exceeds maxval {maxval}")
    return img.reshape(height, width), maxval


def scene_from_pgm(path, n_bins: int, reflectivity: float = 1.0) -> Scene:
    """Build a scene from a graymap depth image.

    Gray values map linearly onto [0, 0.8·n_bins] with uniform reflectivity
    and zero background; run calibrate_levels afterwards to set the budget.
    """
    img, maxval = read_pgm(path)
    depth = img.astype(np.float64) / maxval * (0.8 * n_bins)
    r = np.full(img.shape, float(reflectivity))
    return Scene(depth, r, np.zeros(img.shape), n_bins)
