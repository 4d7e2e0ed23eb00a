"""K-stage unrolled network for multiscale depth fusion and super-resolution."""

from dataclasses import dataclass

import torch
from torch import nn

from .blocks import Expand, FeatureExtract, Squeeze


@dataclass
class StageConfig:
    k_stages: int = 3
    n_scales: int = 3
    channels: int = 32
    sr_factor: int = 1
    leaky_slope: float = 0.1

    def __post_init__(self):
        if self.k_stages < 1:
            raise ValueError("k_stages must be >= 1")
        if self.n_scales < 1:
            raise ValueError("n_scales must be >= 1")
        if self.channels < 1:
            raise ValueError("channels must be >= 1")
        if self.sr_factor < 1:
            raise ValueError("sr_factor must be >= 1")


class BU3DNet(nn.Module):
    """Stages 1..K-1 run feature extraction -> squeeze -> expansion and hand
    the refined multiscale depths to the next stage; stage K stops at the
    squeeze and its output is the depth estimate.  Weights are not shared
    across stages.

    forward() consumes a (batch, L, H, W) depth tensor and returns
    (depth (batch, r*H, r*W), per-stage squeezed depths, per-stage attention
    weights).  `hard` selects argmax scale selection; it defaults to hard in
    eval mode and soft (softmax blend) in train mode.
    """

    def __init__(self, config: StageConfig):
        super().__init__()
        self.config = config
        cfg = config
        self.features = nn.ModuleList(
            FeatureExtract(cfg.n_scales, cfg.channels, cfg.leaky_slope)
            for _ in range(cfg.k_stages))
        self.squeezes = nn.ModuleList(
            Squeeze(cfg.channels, cfg.n_scales, cfg.sr_factor, cfg.leaky_slope)
            for _ in range(cfg.k_stages))
        self.expands = nn.ModuleList(
            Expand(cfg.channels, cfg.n_scales, cfg.sr_factor, cfg.leaky_slope)
            for _ in range(cfg.k_stages - 1))

    def forward(self, d, hard=None):
        if hard is None:
            hard = not self.training
        if d.ndim != 4:
            raise ValueError(f"expected (batch, L, H, W) input, got shape "
                             f"{tuple(d.shape)}")
        if d.shape[1] != self.config.n_scales:
            raise ValueError(f"expected {self.config.n_scales} scales, "
                             f"got {d.shape[1]}")
        if not torch.all(torch.isfinite(d)):
            raise ValueError("input depths must be finite")
        stage_x, stage_w = [], []
        for k in range(self.config.k_stages):
            feats = self.features[k](d)
            x, w = self.squeezes[k](d, feats, hard)
            stage_x.append(x)
            stage_w.append(w)
            if k < self.config.k_stages - 1:
                d = self.expands[k](d, x, feats)
        return stage_x[-1], stage_x, stage_w
