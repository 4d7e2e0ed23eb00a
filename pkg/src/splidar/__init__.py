"""Single-photon lidar toolkit.

Simulation of time-correlated photon-counting histogram cubes, multiscale
matched-filter depth estimation, and Bayesian fusion into a depth map with
per-pixel uncertainty.
"""

from .scene import (CalibrationError, Irf, Scene, SYNTHETIC_SCENES,
                    calibrate_levels, delta_irf, flat_scene, gaussian_irf,
                    load_irf, ppp_sbr, read_pgm, scene_from_pgm, sphere_scene,
                    staircase_scene, step_scene)
from .sim import HistogramCube, expected_rate_cube, simulate
from .pyramid import InvalidScaleError, MultiscalePyramid, build_pyramid, scale_radius
from .mlestim import (MIN_DEPTH_VAR, MultiscaleEstimates, estimate_all,
                      estimate_background, matched_filter_depth,
                      peak_window_halfwidth, reflectivity_mode, signal_stats)
from .fusion import (FusionConfig, GuidanceWeights, ReconState,
                     compute_guidance_weights, inverse_gamma_mode,
                     negative_log_posterior, quad_l1_minimize, reconstruct,
                     update_d, update_eps, update_x, weighted_median)
from .formats import (FormatError, read_cube, read_depth_map, write_cube,
                      write_depth_map, UNITS_BINS, UNITS_METERS)
from .metrics import dae, rmse
from .plyio import export_ply, read_ply

__version__ = "0.1.0"

__all__ = [
    "CalibrationError", "Irf", "Scene", "SYNTHETIC_SCENES",
    "calibrate_levels", "delta_irf", "flat_scene", "gaussian_irf", "load_irf",
    "ppp_sbr", "read_pgm", "scene_from_pgm", "sphere_scene", "staircase_scene",
    "step_scene", "HistogramCube", "expected_rate_cube", "simulate",
    "InvalidScaleError", "MultiscalePyramid", "build_pyramid", "scale_radius",
    "MIN_DEPTH_VAR", "MultiscaleEstimates", "estimate_all",
    "estimate_background", "matched_filter_depth", "peak_window_halfwidth",
    "reflectivity_mode", "signal_stats", "FusionConfig", "GuidanceWeights",
    "ReconState", "compute_guidance_weights", "inverse_gamma_mode",
    "negative_log_posterior", "quad_l1_minimize", "reconstruct", "update_d",
    "update_eps", "update_x", "weighted_median", "FormatError", "read_cube",
    "read_depth_map", "write_cube", "write_depth_map", "UNITS_BINS",
    "UNITS_METERS", "dae", "rmse", "export_ply", "read_ply",
]
