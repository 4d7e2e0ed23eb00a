"""Binary container formats for depth maps and photon histogram cubes.

SPDM (depth map):   '<4sBIIB' header = magic b'SPDM', version, height,
                    width, units (0 = time bins, 1 = meters), followed by
                    height*width little-endian float32, row-major.
SPLH (histograms):  '<4sBIII' header = magic b'SPLH', version, height,
                    width, n_bins, followed by height*width*n_bins
                    little-endian uint32, bin index fastest.
"""

from __future__ import annotations

import struct

import numpy as np

from .sim import HistogramCube

DEPTH_MAGIC = b"SPDM"
CUBE_MAGIC = b"SPLH"
FORMAT_VERSION = 1
_DEPTH_HEADER = struct.Struct("<4sBIIB")
_CUBE_HEADER = struct.Struct("<4sBIII")

UNITS_BINS = 0
UNITS_METERS = 1


class FormatError(ValueError):
    """Raised when a file violates the container layout; the message names
    the offending field."""


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"{what}: expected {n} bytes, got {len(buf)}")
    return buf


def write_depth_map(path, depth: np.ndarray, units: int = UNITS_BINS) -> None:
    depth = np.asarray(depth)
    if depth.ndim != 2 or depth.size == 0:
        raise ValueError("depth must be a nonempty 2-D array")
    if units not in (UNITS_BINS, UNITS_METERS):
        raise ValueError(f"units: must be {UNITS_BINS} (bins) or "
                         f"{UNITS_METERS} (meters), got {units}")
    if not np.all(np.isfinite(depth)):
        raise ValueError("depth: values must be finite")
    h, w = depth.shape
    with open(path, "wb") as fh:
        fh.write(_DEPTH_HEADER.pack(DEPTH_MAGIC, FORMAT_VERSION, h, w, units))
        fh.write(np.ascontiguousarray(depth, dtype="<f4").tobytes())


def read_depth_map(path) -> tuple[np.ndarray, int]:
    """Returns (depth as float64 H x W, units code)."""
    with open(path, "rb") as fh:
        raw = _read_exact(fh, _DEPTH_HEADER.size, "header")
        magic, version, h, w, units = _DEPTH_HEADER.unpack(raw)
        if magic != DEPTH_MAGIC:
            raise FormatError(f"magic: expected {DEPTH_MAGIC!r}, got {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"version: expected {FORMAT_VERSION}, got {version}")
        if h == 0:
            raise FormatError("height: must be positive")
        if w == 0:
            raise FormatError("width: must be positive")
        if units not in (UNITS_BINS, UNITS_METERS):
            raise FormatError(f"units: must be 0 or 1, got {units}")
        payload = _read_exact(fh, 4 * h * w, "payload")
        if fh.read(1):
            raise FormatError("payload: trailing bytes after depth data")
    depth = np.frombuffer(payload, dtype="<f4").reshape(h, w)
    return depth.astype(np.float64), units


def write_cube(path, cube: HistogramCube) -> None:
    counts = cube.counts
    if np.any(counts > np.iinfo(np.uint32).max):
        raise ValueError("counts: value exceeds uint32 range")
    h, w, t = counts.shape
    with open(path, "wb") as fh:
        fh.write(_CUBE_HEADER.pack(CUBE_MAGIC, FORMAT_VERSION, h, w, t))
        fh.write(np.ascontiguousarray(counts, dtype="<u4").tobytes())


def read_cube(path) -> HistogramCube:
    with open(path, "rb") as fh:
        raw = _read_exact(fh, _CUBE_HEADER.size, "header")
        magic, version, h, w, t = _CUBE_HEADER.unpack(raw)
        if magic != CUBE_MAGIC:
            raise FormatError(f"magic: expected {CUBE_MAGIC!r}, got {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"version: expected {FORMAT_VERSION}, got {version}")
        if h == 0:
            raise FormatError("height: must be positive")
        if w == 0:
            raise FormatError("width: must be positive")
        if t == 0:
            raise FormatError("n_bins: must be positive")
        payload = _read_exact(fh, 4 * h * w * t, "payload")
        if fh.read(1):
            raise FormatError("payload: trailing bytes after histogram data")
    counts = np.frombuffer(payload, dtype="<u4").reshape(h, w, t)
    return HistogramCube(counts=counts.astype(np.int64))
