"""Supervised pair generation through the reconstruction toolkit's CLI.

Every sample is produced by two subprocess calls: `splidar simulate`
(histogram cube + ground-truth depth map) and `splidar dump-multiscale`
(per-scale matched-filter depths, the network input).  Super-resolution
pairs reuse the synthetic scene generators' resolution independence: the
same scene rendered at r times the grid size supplies the high-res truth.
"""

import pathlib
import subprocess

from .formats import read_depth_map, read_multiscale

DEFAULT_PPP_GRID = (1.0, 4.0, 16.0)
DEFAULT_SBR_GRID = (0.5, 1.0, 4.0)


def run_primary(args, splidar_cmd="splidar"):
    cmd = [splidar_cmd, *[str(a) for a in args]]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} failed "
                           f"(exit {proc.returncode}): {proc.stderr.strip()}")
    return proc.stdout


def generate_pair(workdir, scene="staircase", size=32, bins=256, ppp=4.0,
                  sbr=1.0, seed=0, n_scales=3, sr_factor=1,
                  splidar_cmd="splidar"):
    """Return ((L, size, size) multiscale depths, (r*size, r*size) truth)."""
    workdir = pathlib.Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    tag = f"{scene}_{size}_p{ppp:g}_s{sbr:g}_r{sr_factor}_{seed}"
    cube = workdir / f"{tag}.splh"
    truth = workdir / f"{tag}_truth.spdm"
    run_primary(["simulate", "--synthetic", scene, "--height", size,
                 "--width", size, "--bins", bins, "--ppp", ppp, "--sbr", sbr,
                 "--seed", seed, "--out", cube, "--out-truth", truth],
                splidar_cmd)
    run_primary(["dump-multiscale", "--in", cube, "--scales", n_scales,
                 "--out-prefix", workdir / tag], splidar_cmd)
    depths = read_multiscale(str(workdir / tag), n_scales)
    if sr_factor > 1:
        # high-res truth: same scene, r-times the grid; the simulate call is
        # only for its --out-truth side channel
        hr_truth = workdir / f"{tag}_truth_hr.spdm"
        run_primary(["simulate", "--synthetic", scene,
                     "--height", sr_factor * size, "--width", sr_factor * size,
                     "--bins", bins, "--ppp", ppp, "--sbr", sbr,
                     "--seed", seed, "--out", workdir / f"{tag}_hr.splh",
                     "--out-truth", hr_truth], splidar_cmd)
        truth = hr_truth
    truth_map, _ = read_depth_map(truth)
    return depths, truth_map


def build_dataset(workdir, scenes=("step", "staircase", "sphere"), size=32,
                  bins=256, ppp_grid=DEFAULT_PPP_GRID,
                  sbr_grid=DEFAULT_SBR_GRID, seeds=(0,), n_scales=3,
                  sr_factor=1, splidar_cmd="splidar"):
    pairs = []
    for scene in scenes:
        for ppp in ppp_grid:
            for sbr in sbr_grid:
                for seed in seeds:
                    pairs.append(generate_pair(
                        workdir, scene=scene, size=size, bins=bins, ppp=ppp,
                        sbr=sbr, seed=seed, n_scales=n_scales,
                        sr_factor=sr_factor, splidar_cmd=splidar_cmd))
    return pairs
