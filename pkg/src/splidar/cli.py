"""Command-line interface.

Subcommands: simulate, reconstruct, evaluate, export-ply, dump-multiscale.
Exit codes: 0 success, 1 I/O or validation failure, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import formats, metrics, plyio
from .fusion import FusionConfig, reconstruct
from .mlestim import estimate_all
from .pyramid import build_pyramid
from .scene import (SYNTHETIC_SCENES, calibrate_levels, gaussian_irf,
                    load_irf, ppp_sbr, scene_from_pgm)
from .sim import simulate


def _add_irf_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--irf", metavar="PATH",
                       help="instrument response samples, one per line")
    group.add_argument("--irf-sigma", type=float, default=2.0, metavar="S",
                       help="use a discrete Gaussian IRF with this std dev "
                            "in bins (default 2.0)")


def _resolve_irf(args):
    if args.irf is not None:
        return load_irf(args.irf)
    if args.irf_sigma <= 0:
        raise ValueError(f"--irf-sigma: must be positive, got {args.irf_sigma}")
    return gaussian_irf(args.irf_sigma)


def _cmd_simulate(args) -> int:
    if args.synthetic is not None:
        scene = SYNTHETIC_SCENES[args.synthetic](args.height, args.width,
                                                 args.bins)
    else:
        scene = scene_from_pgm(args.scene, args.bins)
    scene = calibrate_levels(scene, args.ppp, args.sbr)
    irf = _resolve_irf(args)
    cube = simulate(scene, irf, seed=args.seed)
    formats.write_cube(args.out, cube)
    if args.out_truth is not None:
        formats.write_depth_map(args.out_truth, scene.depth,
                                units=formats.UNITS_BINS)
    ppp, sbr = ppp_sbr(scene)
    print(f"wrote {args.out}: {scene.height}x{scene.width}x{scene.n_bins} "
          f"cube, ppp={ppp:.6g} sbr={sbr:.6g} seed={args.seed}")
    return 0


def _cmd_reconstruct(args) -> int:
    cube = formats.read_cube(args.infile)
    irf = _resolve_irf(args)
    config = FusionConfig(alpha_d=args.alpha, beta_d=args.beta,
                          window_radius=args.window, max_iters=args.iters,
                          tol=args.tol, n_scales=args.scales)
    trace: list = []
    x, eps = reconstruct(cube, irf, config, objective_trace=trace)
    formats.write_depth_map(args.out_depth, x, units=formats.UNITS_BINS)
    if args.out_eps is not None:
        formats.write_depth_map(args.out_eps, eps, units=formats.UNITS_BINS)
    sweeps = trace[-1][0] if trace else 0
    print(f"wrote {args.out_depth}: {x.shape[0]}x{x.shape[1]} depth map "
          f"after {sweeps} sweeps, objective={trace[-1][2]:.6g}")
    return 0


def _cmd_evaluate(args) -> int:
    est, _ = formats.read_depth_map(args.est)
    ref, _ = formats.read_depth_map(args.ref)
    value = metrics.METRICS[args.metric](est, ref)
    print(f"{value:.6f}")
    return 0


def _cmd_export_ply(args) -> int:
    depth, _ = formats.read_depth_map(args.depth)
    eps = None
    if args.eps is not None:
        eps, _ = formats.read_depth_map(args.eps)
    plyio.export_ply(args.out, depth, args.bin_width, eps=eps)
    print(f"wrote {args.out}: {depth.size} vertices")
    return 0


def _cmd_dump_multiscale(args) -> int:
    cube = formats.read_cube(args.infile)
    irf = _resolve_irf(args)
    pyr = build_pyramid(cube, args.scales)
    est = estimate_all(pyr, irf)
    for lvl in range(args.scales):
        path = f"{args.out_prefix}.l{lvl + 1}.spdm"
        formats.write_depth_map(path, est.d_ml[lvl], units=formats.UNITS_BINS)
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splidar",
        description="Single-photon lidar simulation and multiscale Bayesian "
                    "depth reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a photon histogram cube")
    src = p_sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--synthetic", choices=sorted(SYNTHETIC_SCENES),
                     help="built-in test scene")
    src.add_argument("--scene", metavar="PGM",
                     help="grayscale PGM image mapped to a depth plane")
    p_sim.add_argument("--height", type=int, default=64)
    p_sim.add_argument("--width", type=int, default=64)
    p_sim.add_argument("--bins", type=int, default=256,
                       help="histogram bins per pixel (default 256)")
    p_sim.add_argument("--ppp", type=float, default=4.0,
                       help="mean photons per pixel, signal plus background")
    p_sim.add_argument("--sbr", type=float, default=1.0,
                       help="signal to background ratio")
    _add_irf_flags(p_sim)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, metavar="SPLH")
    p_sim.add_argument("--out-truth", metavar="SPDM",
                       help="also write the ground-truth depth map")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rec = sub.add_parser("reconstruct",
                           help="fuse a cube into a depth + uncertainty map")
    p_rec.add_argument("--in", dest="infile", required=True, metavar="SPLH")
    _add_irf_flags(p_rec)
    p_rec.add_argument("--scales", type=int, default=3)
    p_rec.add_argument("--window", type=int, default=1,
                       help="guidance window radius (default 1)")
    p_rec.add_argument("--alpha", type=float, default=1.0,
                       help="inverse-gamma shape prior on eps")
    p_rec.add_argument("--beta", type=float, default=None,
                       help="inverse-gamma rate prior on eps "
                            "(default: from the IRF width)")
    p_rec.add_argument("--iters", type=int, default=50)
    p_rec.add_argument("--tol", type=float, default=1e-4)
    p_rec.add_argument("--out-depth", required=True, metavar="SPDM")
    p_rec.add_argument("--out-eps", metavar="SPDM")
    p_rec.set_defaults(func=_cmd_reconstruct)

    p_eval = sub.add_parser("evaluate", help="compare two depth maps")
    p_eval.add_argument("--est", required=True, metavar="SPDM")
    p_eval.add_argument("--ref", required=True, metavar="SPDM")
    p_eval.add_argument("--metric", choices=sorted(metrics.METRICS),
                        default="dae")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_ply = sub.add_parser("export-ply",
                           help="write a depth map as an ASCII point cloud")
    p_ply.add_argument("--depth", required=True, metavar="SPDM")
    p_ply.add_argument("--eps", metavar="SPDM",
                       help="uncertainty map for per-vertex confidence color")
    p_ply.add_argument("--bin-width", type=float, default=1.0,
                       help="meters per time bin (default 1.0)")
    p_ply.add_argument("--out", required=True, metavar="PLY")
    p_ply.set_defaults(func=_cmd_export_ply)

    p_dump = sub.add_parser("dump-multiscale",
                            help="write per-scale matched-filter depth maps")
    p_dump.add_argument("--in", dest="infile", required=True, metavar="SPLH")
    p_dump.add_argument("--scales", type=int, default=3)
    _add_irf_flags(p_dump)
    p_dump.add_argument("--out-prefix", required=True,
                        help="writes PREFIX.l1.spdm .. PREFIX.lL.spdm")
    p_dump.set_defaults(func=_cmd_dump_multiscale)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"splidar: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
