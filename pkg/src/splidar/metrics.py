"""Depth-map error metrics."""

from __future__ import annotations

import numpy as np


def _check_pair(estimate: np.ndarray, reference: np.ndarray):
    est = np.asarray(estimate, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if est.ndim != 2 or ref.ndim != 2:
        raise ValueError("depth maps must be 2-D")
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: estimate {est.shape} vs "
                         f"reference {ref.shape}")
    if est.size == 0:
        raise ValueError("depth maps must be nonempty")
    return est, ref


def dae(estimate: np.ndarray, reference: np.ndarray) -> float:
    """Depth absolute error: mean of |estimate - reference| over all pixels."""
    est, ref = _check_pair(estimate, reference)
    return float(np.mean(np.abs(est - ref)))


def rmse(estimate: np.ndarray, reference: np.ndarray) -> float:
    """Root mean squared depth error."""
    est, ref = _check_pair(estimate, reference)
    return float(np.sqrt(np.mean((est - ref) ** 2)))


METRICS = {"dae": dae, "rmse": rmse}
