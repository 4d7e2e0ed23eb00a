"""Command line interface: train, infer, infer-sr."""

import argparse
import sys
import tempfile

import numpy as np
import torch

from .datagen import build_dataset
from .formats import read_multiscale, write_depth_map
from .network import BU3DNet, StageConfig
from .training import TrainConfig, load_checkpoint, save_checkpoint, train


def _cmd_train(args):
    config = StageConfig(k_stages=args.stages, n_scales=args.scales,
                         channels=args.channels, sr_factor=args.sr_factor)
    # validate the optimizer settings before spending time on data generation
    train_config = TrainConfig(epochs=args.epochs, lr=args.lr,
                               aux_weight=args.aux_weight,
                               batch_size=args.batch_size, seed=args.seed)
    workdir = args.workdir or tempfile.mkdtemp(prefix="bu3d_data_")
    print(f"generating {len(args.scene)}x{len(args.ppp)}x{len(args.sbr)}"
          f"x{args.seeds} pairs in {workdir}")
    dataset = build_dataset(
        workdir, scenes=args.scene, size=args.size, bins=args.bins,
        ppp_grid=args.ppp, sbr_grid=args.sbr, seeds=range(args.seeds),
        n_scales=args.scales, sr_factor=args.sr_factor,
        splidar_cmd=args.splidar_cmd)
    torch.manual_seed(args.seed)
    model = BU3DNet(config)
    history = train(model, dataset, train_config, log=print)
    save_checkpoint(args.out, model)
    print(f"wrote {args.out}: {len(dataset)} pairs, "
          f"final loss {history[-1]:.6f}")
    return 0


def _run_inference(args, want_sr):
    model = load_checkpoint(args.model)
    r = model.config.sr_factor
    if want_sr and r == 1:
        raise ValueError("infer-sr needs a model trained with --sr-factor > 1"
                         " (this checkpoint has sr_factor=1)")
    if not want_sr and r != 1:
        raise ValueError(f"infer expects an sr_factor=1 model; this "
                         f"checkpoint has sr_factor={r} (use infer-sr)")
    depths = read_multiscale(args.in_prefix, model.config.n_scales)
    with torch.no_grad():
        depth, _, _ = model(torch.as_tensor(depths[None],
                                            dtype=torch.float32))
    out = depth[0].numpy().astype(np.float64)
    write_depth_map(args.out_depth, out)
    print(f"wrote {args.out_depth}: {out.shape[0]}x{out.shape[1]} depth map")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bu3d",
        description="Unrolled network for multiscale lidar depth fusion "
                    "and super-resolution.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser(
        "train", help="generate pairs via the splidar CLI and fit a model")
    p_train.add_argument("--out", metavar="PT", required=True)
    p_train.add_argument("--workdir", metavar="DIR",
                         help="where generated pairs land (default: tmpdir)")
    p_train.add_argument("--scene", nargs="+",
                         default=["step", "staircase", "sphere"])
    p_train.add_argument("--size", type=int, default=32)
    p_train.add_argument("--bins", type=int, default=256)
    p_train.add_argument("--ppp", type=float, nargs="+",
                         default=[1.0, 4.0, 16.0])
    p_train.add_argument("--sbr", type=float, nargs="+",
                         default=[0.5, 1.0, 4.0])
    p_train.add_argument("--seeds", type=int, default=1,
                         help="simulation seeds per grid cell")
    p_train.add_argument("--scales", type=int, default=3)
    p_train.add_argument("--stages", type=int, default=3)
    p_train.add_argument("--channels", type=int, default=32)
    p_train.add_argument("--sr-factor", type=int, default=1)
    p_train.add_argument("--epochs", type=int, default=200)
    p_train.add_argument("--lr", type=float, default=3e-3)
    p_train.add_argument("--aux-weight", type=float, default=0.5)
    p_train.add_argument("--batch-size", type=int, default=8)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--splidar-cmd", default="splidar",
                         help="reconstruction toolkit executable")
    p_train.set_defaults(func=_cmd_train)

    for name, want_sr in (("infer", False), ("infer-sr", True)):
        p = sub.add_parser(
            name, help=("apply a super-resolving model" if want_sr
                        else "apply a trained model to multiscale depths"))
        p.add_argument("--model", metavar="PT", required=True)
        p.add_argument("--in-prefix", metavar="PREFIX", required=True,
                       help="reads PREFIX.l1.spdm .. PREFIX.lL.spdm "
                            "(splidar dump-multiscale output)")
        p.add_argument("--out-depth", metavar="SPDM", required=True)
        p.set_defaults(func=lambda args, sr=want_sr: _run_inference(args, sr))

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"bu3d: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
