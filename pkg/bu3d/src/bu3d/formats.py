"""Readers and writers for the lidar toolkit's on-disk formats.

The depth-map and histogram-cube layouts are the integration boundary with
the reconstruction toolkit; this module parses them independently so the
network package has no import-time dependency on it.

Depth map (.spdm): little-endian header magic "SPDM" | u8 version | u32
height | u32 width | u8 units (0 bins, 1 meters), then height*width float32
row-major.  Histogram cube (.splh): magic "SPLH" | u8 version | u32 height |
u32 width | u32 bins, then uint32 counts with the bin index fastest.
"""

import struct

import numpy as np

DEPTH_MAGIC = b"SPDM"
CUBE_MAGIC = b"SPLH"
FORMAT_VERSION = 1

_DEPTH_HEADER = struct.Struct("<4sBIIB")
_CUBE_HEADER = struct.Struct("<4sBIII")


class DepthFileError(ValueError):
    """Raised when an on-disk depth map or cube does not parse."""


def _read_exact(fh, n_bytes, what):
    data = fh.read(n_bytes)
    if len(data) != n_bytes:
        raise DepthFileError(f"{what}: expected {n_bytes} bytes, "
                             f"got {len(data)}")
    return data


def read_depth_map(path):
    """Return (float32 array of shape (H, W), units code)."""
    with open(path, "rb") as fh:
        magic, version, height, width, units = _DEPTH_HEADER.unpack(
            _read_exact(fh, _DEPTH_HEADER.size, "header"))
        if magic != DEPTH_MAGIC:
            raise DepthFileError(f"magic: expected {DEPTH_MAGIC!r}, "
                                 f"got {magic!r}")
        if version != FORMAT_VERSION:
            raise DepthFileError(f"version: expected {FORMAT_VERSION}, "
                                 f"got {version}")
        if height == 0 or width == 0:
            raise DepthFileError(f"dimensions: {height}x{width} is empty")
        payload = _read_exact(fh, 4 * height * width, "payload")
        if fh.read(1):
            raise DepthFileError("payload: trailing bytes after depth data")
    depth = np.frombuffer(payload, dtype="<f4").reshape(height, width)
    return depth.astype(np.float32), int(units)


def write_depth_map(path, depth, units=0):
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2 or depth.size == 0:
        raise DepthFileError("depth map must be a nonempty 2-D array")
    if not np.all(np.isfinite(depth)):
        raise DepthFileError("depth map must be finite")
    height, width = depth.shape
    with open(path, "wb") as fh:
        fh.write(_DEPTH_HEADER.pack(DEPTH_MAGIC, FORMAT_VERSION,
                                    height, width, units))
        fh.write(np.ascontiguousarray(depth, dtype="<f4").tobytes())


def read_cube(path):
    """Return int64 counts of shape (H, W, T)."""
    with open(path, "rb") as fh:
        magic, version, height, width, n_bins = _CUBE_HEADER.unpack(
            _read_exact(fh, _CUBE_HEADER.size, "header"))
        if magic != CUBE_MAGIC:
            raise DepthFileError(f"magic: expected {CUBE_MAGIC!r}, "
                                 f"got {magic!r}")
        if version != FORMAT_VERSION:
            raise DepthFileError(f"version: expected {FORMAT_VERSION}, "
                                 f"got {version}")
        if height == 0 or width == 0 or n_bins == 0:
            raise DepthFileError(
                f"dimensions: {height}x{width}x{n_bins} is empty")
        payload = _read_exact(fh, 4 * height * width * n_bins, "payload")
        if fh.read(1):
            raise DepthFileError("payload: trailing bytes after count data")
    counts = np.frombuffer(payload, dtype="<u4")
    return counts.reshape(height, width, n_bins).astype(np.int64)


def read_multiscale(prefix, n_scales):
    """Stack `{prefix}.l1.spdm` .. `{prefix}.l{n_scales}.spdm` into (L, H, W).

    These are the per-scale matched-filter depths the reconstruction CLI
    dumps; they are the network's input.
    """
    maps = []
    for level in range(1, n_scales + 1):
        depth, _ = read_depth_map(f"{prefix}.l{level}.spdm")
        maps.append(depth)
    shapes = {m.shape for m in maps}
    if len(shapes) != 1:
        raise DepthFileError(f"scale maps disagree on shape: {sorted(shapes)}")
    return np.stack(maps, axis=0)
