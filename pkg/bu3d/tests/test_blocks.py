"""Per-block contracts: shapes, scale selection, blend bounds, fixpoints.

Exact claims (membership, constant propagation) are tested with ==; claims
that are only algebraically exact (convex-blend bounds, uniform-attention
means) run in float64 with tight tolerances.
"""

import numpy as np
import torch
from torch.nn import functional as F

from bu3d.blocks import Expand, FeatureExtract, Squeeze, upsample_parent


def rand_depths(seed, batch, scales, height, width, spread=10.0):
    rng = np.random.default_rng(seed)
    return torch.tensor(rng.normal(0.0, spread, (batch, scales, height,
                                                 width)), dtype=torch.float32)


class TestUpsampleParent:
    def test_each_child_copies_its_parent(self):
        d = torch.arange(4.0).reshape(1, 1, 2, 2)
        up = upsample_parent(d, 2)
        expect = torch.tensor([[0.0, 0.0, 1.0, 1.0],
                               [0.0, 0.0, 1.0, 1.0],
                               [2.0, 2.0, 3.0, 3.0],
                               [2.0, 2.0, 3.0, 3.0]])
        assert torch.equal(up[0, 0], expect)

    def test_factor_one_is_identity(self):
        d = torch.randn(2, 3, 5, 4)
        assert torch.equal(upsample_parent(d, 1), d)

    def test_shape(self):
        assert upsample_parent(torch.zeros(2, 3, 4, 5), 3).shape \
            == (2, 3, 12, 15)


class TestFeatureExtract:
    def test_preserves_spatial_dims(self):
        torch.manual_seed(0)
        block = FeatureExtract(n_scales=3, channels=6)
        out = block(rand_depths(1, 2, 3, 5, 7))
        assert out.shape == (2, 6, 5, 7)
        assert torch.isfinite(out).all()

    def test_gradients_reach_every_parameter(self):
        torch.manual_seed(0)
        block = FeatureExtract(n_scales=2, channels=4)
        block(rand_depths(2, 1, 2, 6, 6)).sum().backward()
        assert all(p.grad is not None and torch.isfinite(p.grad).all()
                   for p in block.parameters())


class TestSqueeze:
    def test_hard_output_is_a_member_per_pixel(self):
        torch.manual_seed(1)
        block = Squeeze(channels=5, n_scales=4)
        d = rand_depths(3, 2, 4, 6, 6)
        feats = torch.randn(2, 5, 6, 6)
        x, w = block(d, feats, hard=True)
        assert x.shape == (2, 6, 6)
        assert w.shape == (2, 4, 6, 6)
        assert (d == x.unsqueeze(1)).any(dim=1).all()

    def test_tied_logits_pick_the_first_scale(self):
        torch.manual_seed(1)
        block = Squeeze(channels=5, n_scales=3)
        torch.nn.init.zeros_(block.attention[-1].weight)
        torch.nn.init.zeros_(block.attention[-1].bias)
        d = rand_depths(4, 1, 3, 5, 5)
        x, _ = block(d, torch.randn(1, 5, 5, 5), hard=True)
        assert torch.equal(x, d[:, 0])

    def test_uniform_attention_soft_blend_is_the_mean(self):
        torch.manual_seed(1)
        block = Squeeze(channels=5, n_scales=3).double()
        torch.nn.init.zeros_(block.attention[-1].weight)
        torch.nn.init.zeros_(block.attention[-1].bias)
        d = rand_depths(5, 2, 3, 5, 5).double()
        x, _ = block(d, torch.randn(2, 5, 5, 5, dtype=torch.float64),
                     hard=False)
        assert torch.allclose(x, d.mean(dim=1), atol=1e-12)

    def test_soft_blend_stays_within_scale_range(self):
        torch.manual_seed(2)
        block = Squeeze(channels=5, n_scales=4).double()
        d = rand_depths(6, 2, 4, 6, 6).double()
        x, _ = block(d, torch.randn(2, 5, 6, 6, dtype=torch.float64),
                     hard=False)
        assert (x >= d.min(dim=1).values - 1e-12).all()
        assert (x <= d.max(dim=1).values + 1e-12).all()

    def test_attention_head_emits_one_weight_per_scale(self):
        # pre-upsampling the head is exactly L channels, SR or not
        for r in (1, 2):
            block = Squeeze(channels=5, n_scales=3, sr_factor=r)
            assert block.attention[-1].out_channels == 3

    def test_sr_selects_among_the_parent_candidates(self):
        torch.manual_seed(3)
        block = Squeeze(channels=5, n_scales=3, sr_factor=2)
        d = rand_depths(7, 1, 3, 4, 4)
        x, w = block(d, torch.randn(1, 5, 4, 4), hard=True)
        assert x.shape == (1, 8, 8)
        assert w.shape == (1, 3, 8, 8)
        parents = upsample_parent(d, 2)
        assert (parents == x.unsqueeze(1)).any(dim=1).all()


class TestExpand:
    def test_output_between_scale_and_squeezed_depth(self):
        torch.manual_seed(4)
        block = Expand(channels=5, n_scales=3).double()
        d = rand_depths(8, 2, 3, 6, 6).double()
        x = torch.randn(2, 6, 6, dtype=torch.float64) * 10
        out = block(d, x, torch.randn(2, 5, 6, 6, dtype=torch.float64))
        assert out.shape == d.shape
        lower = torch.minimum(d, x.unsqueeze(1))
        upper = torch.maximum(d, x.unsqueeze(1))
        assert (out >= lower - 1e-12).all()
        assert (out <= upper + 1e-12).all()

    def test_sr_output_between_scale_and_patch_extremes(self):
        torch.manual_seed(5)
        block = Expand(channels=5, n_scales=3, sr_factor=2).double()
        d = rand_depths(9, 1, 3, 4, 4).double()
        x = torch.randn(1, 8, 8, dtype=torch.float64) * 10
        out = block(d, x, torch.randn(1, 5, 4, 4, dtype=torch.float64))
        assert out.shape == d.shape
        patches = F.pixel_unshuffle(x.unsqueeze(1), 2)
        lower = torch.minimum(d, patches.min(dim=1, keepdim=True).values)
        upper = torch.maximum(d, patches.max(dim=1, keepdim=True).values)
        assert (out >= lower - 1e-12).all()
        assert (out <= upper + 1e-12).all()

    def test_constant_inputs_pass_through_exactly(self):
        torch.manual_seed(6)
        for r in (1, 2, 4):
            block = Expand(channels=5, n_scales=3, sr_factor=r)
            d = torch.full((1, 3, 4, 4), 7.5)
            x = torch.full((1, 4 * r, 4 * r), 7.5)
            out = block(d, x, torch.randn(1, 5, 4, 4))
            assert torch.equal(out, d)

    def test_agreeing_scale_is_left_alone(self):
        # where d already equals the blend target, the output equals both
        torch.manual_seed(7)
        block = Expand(channels=5, n_scales=2)
        x = torch.randn(1, 5, 5) * 4
        d = x.unsqueeze(1).repeat(1, 2, 1, 1)
        out = block(d, x, torch.randn(1, 5, 5, 5))
        assert torch.equal(out, d)
