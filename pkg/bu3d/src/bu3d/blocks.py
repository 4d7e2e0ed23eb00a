"""The three per-stage blocks of the unrolled network.

Every convolution is 3x3, stride 1, symmetric padding, followed by a
LeakyReLU, except the two attention heads: the scale-attention head emits
raw logits (the argmax/softmax that consumes them supplies the
normalization) and the refinement head ends in a sigmoid (slice-wise
normalization to [0, 1]).
"""

import torch
from torch import nn
from torch.nn import functional as F


def upsample_parent(d, factor):
    """Nearest-neighbor upsampling so each output pixel carries its parent
    low-res pixel's depth candidates."""
    return d.repeat_interleave(factor, dim=-2).repeat_interleave(factor, dim=-1)


class FeatureExtract(nn.Module):
    """Three stacked 3x3 convolutions with LeakyReLU after each; spatial
    dimensions are preserved."""

    def __init__(self, n_scales, channels, leaky_slope=0.1):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(n_scales, channels, 3, padding=1),
            nn.LeakyReLU(leaky_slope),
            nn.Conv2d(channels, channels, 3, padding=1),
            nn.LeakyReLU(leaky_slope),
            nn.Conv2d(channels, channels, 3, padding=1),
            nn.LeakyReLU(leaky_slope),
        )

    def forward(self, d):
        return self.net(d)


class Squeeze(nn.Module):
    """Collapse the scale axis by per-pixel scale selection.

    An attention head turns the stage features into one weight map per
    scale.  At inference the squeezed depth copies the depth of the winning
    scale (hard argmax, first index on ties); during training the softmax
    relaxation keeps the block differentiable.  With sr_factor > 1 the L
    weight maps are upsampled by sub-pixel convolution (conv to L*r^2
    channels + pixel shuffle) and every high-res pixel selects among the
    depth candidates of its low-res parent.
    """

    def __init__(self, channels, n_scales, sr_factor=1, leaky_slope=0.1):
        super().__init__()
        self.n_scales = n_scales
        self.sr_factor = sr_factor
        self.attention = nn.Sequential(
            nn.Conv2d(channels, channels, 3, padding=1),
            nn.LeakyReLU(leaky_slope),
            nn.Conv2d(channels, n_scales, 3, padding=1),
        )
        if sr_factor > 1:
            self.upsample = nn.Sequential(
                nn.Conv2d(n_scales, n_scales * sr_factor**2, 3, padding=1),
                nn.PixelShuffle(sr_factor),
            )

    def forward(self, d, features, hard):
        w = self.attention(features)
        if self.sr_factor > 1:
            w = self.upsample(w)
            d = upsample_parent(d, self.sr_factor)
        if hard:
            idx = w.argmax(dim=1, keepdim=True)
            x = torch.gather(d, 1, idx).squeeze(1)
        else:
            # blend relative to the first scale so constant depth fields pass
            # through bit-exactly (softmax only sums to 1 up to rounding)
            base = d[:, 0]
            p = torch.softmax(w, dim=1)
            x = base + (p * (d - base.unsqueeze(1))).sum(dim=1)
        return x, w


class Expand(nn.Module):
    """Refine each scale toward the squeezed depth by a learned convex blend.

    The per-scale absolute differences |d - x| (all r^2 of them per scale
    when super-resolving) concatenated with the stage features drive a
    sigmoid weight per scale; the output is w*d + (1-w)*target, where the
    target is x itself, or the mean of its r x r patch when x lives on the
    high-res grid.  Output stays on the low-res grid: it feeds the next
    stage.
    """

    def __init__(self, channels, n_scales, sr_factor=1, leaky_slope=0.1):
        super().__init__()
        self.n_scales = n_scales
        self.sr_factor = sr_factor
        in_channels = n_scales * sr_factor**2 + channels
        self.weights = nn.Sequential(
            nn.Conv2d(in_channels, channels, 3, padding=1),
            nn.LeakyReLU(leaky_slope),
            nn.Conv2d(channels, n_scales, 3, padding=1),
            nn.Sigmoid(),
        )

    def forward(self, d, x, features):
        r = self.sr_factor
        if r == 1:
            target = x.unsqueeze(1)
            diffs = (d - target).abs()
        else:
            patches = F.pixel_unshuffle(x.unsqueeze(1), r)  # B, r^2, H, W
            diffs = (d.unsqueeze(2) - patches.unsqueeze(1)).abs().flatten(1, 2)
            target = patches.mean(dim=1, keepdim=True)
        w_bar = self.weights(torch.cat([diffs, features], dim=1))
        # written as target + w*(d - target) rather than w*d + (1-w)*target:
        # same convex blend, but constant fields survive without rounding
        return target + w_bar * (d - target)
