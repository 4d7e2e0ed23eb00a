"""Unrolled Bayesian network for single-photon lidar depth reconstruction
and super-resolution."""

from .blocks import Expand, FeatureExtract, Squeeze, upsample_parent
from .datagen import build_dataset, generate_pair, run_primary
from .formats import (CUBE_MAGIC, DEPTH_MAGIC, FORMAT_VERSION, DepthFileError,
                      read_cube, read_depth_map, read_multiscale,
                      write_depth_map)
from .network import BU3DNet, StageConfig
from .training import (CHECKPOINT_VERSION, TrainConfig, load_checkpoint,
                       save_checkpoint, staged_l1_loss, train)

__version__ = "0.1.0"

__all__ = [
    "BU3DNet",
    "CHECKPOINT_VERSION",
    "CUBE_MAGIC",
    "DEPTH_MAGIC",
    "DepthFileError",
    "Expand",
    "FORMAT_VERSION",
    "FeatureExtract",
    "Squeeze",
    "StageConfig",
    "TrainConfig",
    "build_dataset",
    "generate_pair",
    "load_checkpoint",
    "read_cube",
    "read_depth_map",
    "read_multiscale",
    "run_primary",
    "save_checkpoint",
    "staged_l1_loss",
    "train",
    "upsample_parent",
    "write_depth_map",
]
