"""ASCII PLY export of depth maps as point clouds.

One vertex per pixel: x = column index, y = row index, z = depth (bins)
times the bin width in meters.  When an uncertainty map is supplied, each
vertex carries a grayscale color from the confidence 1/eps, linearly
rescaled to [0, 255] (larger = more certain).
"""

from __future__ import annotations

import numpy as np


def export_ply(path, depth: np.ndarray, bin_width_meters: float,
               eps: np.ndarray | None = None) -> None:
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2 or depth.size == 0:
        raise ValueError("depth must be a nonempty 2-D array")
    if not np.all(np.isfinite(depth)):
        raise ValueError("depth values must be finite")
    if bin_width_meters <= 0:
        raise ValueError("bin_width_meters must be positive")
    gray = None
    if eps is not None:
        eps = np.asarray(eps, dtype=np.float64)
        if eps.shape != depth.shape:
            raise ValueError(f"eps shape {eps.shape} does not match depth "
                             f"shape {depth.shape}")
        if np.any(eps <= 0) or not np.all(np.isfinite(eps)):
            raise ValueError("eps values must be finite and positive")
        conf = 1.0 / eps
        lo, hi = conf.min(), conf.max()
        if hi > lo:
            gray = np.rint(255.0 * (conf - lo) / (hi - lo)).astype(np.int64)
        else:
            gray = np.full(depth.shape, 255, dtype=np.int64)

    h, w = depth.shape
    z = depth * bin_width_meters
    lines = [
        "ply",
        "format ascii 1.0",
        f"comment x = column index, y = row index, z = depth * "
        f"{bin_width_meters:.9g} m per bin",
    ]
    if gray is not None:
        lines.append("comment color = confidence 1/eps rescaled to [0, 255], "
                     "larger = more certain")
    lines.append(f"element vertex {h * w}")
    lines += ["property float x", "property float y", "property float z"]
    if gray is not None:
        lines += ["property uchar red", "property uchar green",
                  "property uchar blue"]
    lines.append("end_header")
    for i in range(h):
        for j in range(w):
            vert = f"{float(j):.9g} {float(i):.9g} {z[i, j]:.9g}"
            if gray is not None:
                g = gray[i, j]
                vert += f" {g} {g} {g}"
            lines.append(vert)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_ply(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Minimal reader for the files export_ply writes.

    Returns (vertices as N x 3 float64, grayscale as N int64 or None).
    """
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read().splitlines()
    if not text or text[0] != "ply":
        raise ValueError("not a PLY file: missing 'ply' magic line")
    n_vertex = None
    has_color = False
    body_at = None
    for idx, line in enumerate(text[1:], start=1):
        if line.startswith("element vertex "):
            n_vertex = int(line.split()[-1])
        elif line == "property uchar red":
            has_color = True
        elif line == "end_header":
            body_at = idx + 1
            break
    if n_vertex is None or body_at is None:
        raise ValueError("malformed PLY header: missing element count or "
                         "end_header")
    rows = text[body_at:body_at + n_vertex]
    if len(rows) != n_vertex:
        raise ValueError(f"vertex count: header says {n_vertex}, "
                         f"file has {len(rows)}")
    data = np.array([r.split() for r in rows], dtype=np.float64)
    xyz = data[:, :3]
    gray = data[:, 3].astype(np.int64) if has_color else None
    return xyz, gray
