"""End-to-end acceptance gate.

Each test covers one release criterion, enforces its runtime budget, and
prints a single "[acceptance] ..." verdict line (run pytest with -s to see
the lines for passing tests too).  Oracles here are deliberately dumb and
self-contained: exhaustive candidate scans, dense grid search, golden
section.  They share no code with the package.
"""

import math
import time

import numpy as np

import splidar as sp
from splidar.fusion import ReconState, window_offsets


def _verdict(label, ok):
    print(f"[acceptance] {label}: {'PASS' if ok else 'FAIL'}")
    return ok


# ---------------------------------------------------------------------------
# independent oracles


def oracle_weighted_median(values, weights):
    """Evaluate the weighted L1 objective at every candidate; smallest
    candidate among ties (1e-12 relative band) wins."""
    objs = [math.fsum(w * abs(v - c) for v, w in zip(values, weights))
            for c in values]
    best = min(objs)
    band = 1e-12 * max(abs(best), 1.0)
    return min(v for v, o in zip(values, objs) if o <= best + band)


def oracle_grid_quad_l1(anchor, variance, targets, couplings, grid):
    obj = (grid - anchor) ** 2 / (2.0 * variance)
    for t, c in zip(targets, couplings):
        obj = obj + c * np.abs(grid - t)
    return float(grid[np.argmin(obj)])


def golden_min(fun, lo, hi, iters=200):
    """Vectorized golden-section minimizer over per-element brackets."""
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(iters):
        a = hi - ratio * (hi - lo)
        b = lo + ratio * (hi - lo)
        fa, fb = fun(a), fun(b)
        hi = np.where(fa < fb, b, hi)
        lo = np.where(fa < fb, lo, a)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# criteria


def test_c1_calibration_exact():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        ppp = float(rng.uniform(0.2, 50.0))
        sbr = float(rng.uniform(0.05, 80.0))
        scene = sp.calibrate_levels(sp.staircase_scene(12, 12, 128), ppp, sbr)
        got_ppp, got_sbr = sp.ppp_sbr(scene)
        worst = max(worst, abs(got_ppp - ppp) / ppp, abs(got_sbr - sbr) / sbr)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 1.0
    assert _verdict(
        f"C1 calibration 20 random (ppp, sbr) targets, "
        f"worst rel err {worst:.2e}, {dt:.2f}s", ok)


def test_c2_simulator_statistics():
    t0 = time.perf_counter()
    irf = sp.gaussian_irf(2.0)
    scene = sp.calibrate_levels(sp.flat_scene(64, 64, 256), 4.0, 1.0)
    n_pix = 64 * 64
    three_se = 3.0 * math.sqrt(4.0 / n_pix)
    devs = []
    for seed in range(3):
        cube = sp.simulate(scene, irf, seed=seed)
        devs.append(abs(cube.counts.sum() / n_pix - 4.0))
    dt = time.perf_counter() - t0
    ok = max(devs) <= three_se and dt < 5.0
    assert _verdict(
        f"C2 simulator mean count 64x64x256 PPP=4, 3 seeds, "
        f"worst dev {max(devs):.4f} (3SE={three_se:.4f}), {dt:.2f}s", ok)


def test_c3_update_x_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(23)
    bad = 0
    for i in range(1000):
        k = int(rng.integers(1, 12))
        if i % 2:
            values = rng.integers(0, 6, k).astype(float)
        else:
            values = rng.uniform(0.0, 100.0, k)
        weights = rng.integers(0, 5, k) / 4.0
        if weights.sum() == 0.0:
            weights[int(rng.integers(k))] = 0.25
        got = sp.weighted_median(values, weights)
        if got != oracle_weighted_median(values, weights):
            bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 1.0
    assert _verdict(
        f"C3 weighted median vs exhaustive scan, 1000 instances, "
        f"{bad} mismatches, {dt:.2f}s", ok)


def test_c4_update_d_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(37)
    grid = np.arange(-1.0, 11.0 + 1e-4, 1e-4)
    worst = 0.0
    for _ in range(1000):
        anchor = float(rng.uniform(0.0, 10.0))
        variance = float(rng.uniform(0.02, 5.0))
        k = int(rng.integers(0, 10))
        targets = rng.uniform(0.0, 10.0, k)
        couplings = rng.uniform(0.0, 2.0, k)
        couplings[rng.random(k) < 0.25] = 0.0
        got = sp.quad_l1_minimize(anchor, variance, targets, couplings)
        ref = oracle_grid_quad_l1(anchor, variance, targets, couplings, grid)
        worst = max(worst, abs(got - ref))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-3 and dt < 10.0
    assert _verdict(
        f"C4 shrinkage vs 1e-4 grid search, 1000 instances, "
        f"worst |diff| {worst:.2e}, {dt:.2f}s", ok)


def test_c5_update_eps_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(41)
    n_scales, h, w = 3, 25, 40  # 1000 pixels, one instance each
    offsets = window_offsets(1)
    k_win = len(offsets)
    wgt = rng.uniform(0.0, 1.0, (n_scales, k_win, h, w))
    wgt[rng.random(wgt.shape) < 0.3] = 0.0
    x = rng.uniform(0.0, 30.0, (h, w))
    d = rng.uniform(0.0, 30.0, (n_scales, h, w))
    config = sp.FusionConfig(alpha_d=1.3, beta_d=0.7)
    # zero the window slots whose neighbor falls outside the image
    for k, (di, dj) in enumerate(offsets):
        for i in range(h):
            for j in range(w):
                if not (0 <= i + di < h and 0 <= j + dj < w):
                    wgt[:, k, i, j] = 0.0
    weights = sp.GuidanceWeights(w=wgt, window_radius=1, offsets=offsets)
    state = ReconState(x=x, eps=np.ones((h, w)), d=d,
                       iteration=0, objective=np.inf)
    got = sp.update_eps(state, weights, config)

    # per-pixel objective coefficients assembled by plain loops
    a_coef = np.full((h, w), config.beta_d)
    b_coef = np.full((h, w), config.alpha_d + 1.0)
    for i in range(h):
        for j in range(w):
            for lvl in range(n_scales):
                for k, (di, dj) in enumerate(offsets):
                    wk = wgt[lvl, k, i, j]
                    if wk > 0.0:
                        a_coef[i, j] += wk * abs(x[i, j] - d[lvl, i + di, j + dj])
                        b_coef[i, j] += 1.0
    ref = golden_min(lambda e: a_coef / e + b_coef * np.log(e),
                     np.full((h, w), 1e-9), a_coef + 1.0)
    rel = np.abs(got - ref) / ref
    dt = time.perf_counter() - t0
    ok = float(rel.max()) <= 1e-6 and dt < 5.0
    assert _verdict(
        f"C5 eps update vs golden section, 1000 instances, "
        f"worst rel err {rel.max():.2e}, {dt:.2f}s", ok)


def test_c6_posterior_monotone():
    t0 = time.perf_counter()
    irf = sp.gaussian_irf(2.0)
    scene = sp.calibrate_levels(sp.step_scene(32, 32, 256), 4.0, 1.0)
    worst = -np.inf
    n_stages = 0
    for seed in range(20):
        cube = sp.simulate(scene, irf, seed=seed)
        trace = []
        sp.reconstruct(cube, irf, objective_trace=trace)
        objs = np.array([entry[2] for entry in trace])
        worst = max(worst, float(np.diff(objs).max()))
        n_stages += len(objs) - 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9
    assert _verdict(
        f"C6 posterior monotone on 20 seeded 32x32 runs "
        f"({n_stages} block updates), worst increase {worst:.2e}, {dt:.2f}s",
        ok)


def test_c7_fusion_beats_per_pixel_ml():
    t0 = time.perf_counter()
    irf = sp.gaussian_irf(2.0)
    scene = sp.calibrate_levels(sp.step_scene(64, 64, 256), 4.0, 1.0)
    wins = 0
    pairs = []
    for seed in range(10):
        cube = sp.simulate(scene, irf, seed=seed)
        fused, _ = sp.reconstruct(cube, irf)
        est = sp.estimate_all(sp.build_pyramid(cube, 1), irf)
        dae_fused = sp.dae(fused, scene.depth)
        dae_ml = sp.dae(est.d_ml[0], scene.depth)
        pairs.append((dae_fused, dae_ml))
        wins += dae_fused < dae_ml
    dt = time.perf_counter() - t0
    ok = wins >= 9 and dt < 60.0
    med = sorted(pairs)[5]
    assert _verdict(
        f"C7 fusion beats level-1 ML on {wins}/10 seeds "
        f"(median DAE {med[0]:.2f} vs {med[1]:.2f}), {dt:.1f}s", ok)


def test_c8_noiseless_sanity():
    t0 = time.perf_counter()
    irf = sp.gaussian_irf(2.0)
    h, w, t_bins = 64, 64, 256
    scene = sp.Scene(depth=np.full((h, w), 100.25),
                     reflectivity=np.full((h, w), 1000.0),
                     background=np.zeros((h, w)),
                     n_bins=t_bins)
    counts = np.rint(sp.expected_rate_cube(scene, irf)).astype(np.int64)
    fused, _ = sp.reconstruct(sp.HistogramCube(counts), irf)
    err = sp.dae(fused, scene.depth)
    dt = time.perf_counter() - t0
    ok = err < 0.5 and dt < 10.0
    assert _verdict(
        f"C8 noiseless flat scene r=1000 b=0, DAE {err:.4f} bins, {dt:.2f}s",
        ok)


def test_c9_format_round_trips(tmp_path):
    rng = np.random.default_rng(5)
    depth = (rng.random((17, 23), dtype=np.float32)
             * np.float32(200.0)).astype(np.float64)
    sp.write_depth_map(tmp_path / "d.spdm", depth, units=sp.UNITS_BINS)
    back, units = sp.read_depth_map(tmp_path / "d.spdm")
    depth_ok = bool(np.array_equal(back, depth)) and units == sp.UNITS_BINS

    cube = sp.HistogramCube(rng.integers(0, 1000, (6, 7, 32)).astype(np.int64))
    sp.write_cube(tmp_path / "c.splh", cube)
    cube_ok = bool(np.array_equal(sp.read_cube(tmp_path / "c.splh").counts,
                                  cube.counts))

    eps = rng.uniform(0.5, 4.0, depth.shape)
    bin_width = 0.015
    sp.export_ply(tmp_path / "p.ply", depth, bin_width, eps=eps)
    xyz, gray = sp.read_ply(tmp_path / "p.ply")
    rows, cols = np.divmod(np.arange(depth.size), depth.shape[1])
    ply_ok = (bool(np.array_equal(xyz[:, 0], cols))
              and bool(np.array_equal(xyz[:, 1], rows))
              and bool(np.allclose(xyz[:, 2], depth.ravel() * bin_width,
                                   rtol=float(np.finfo(np.float32).eps),
                                   atol=0.0))
              and gray is not None)

    ok = depth_ok and cube_ok and ply_ok
    assert _verdict(
        f"C9 round trips depth={'ok' if depth_ok else 'BAD'} "
        f"cube={'ok' if cube_ok else 'BAD'} ply={'ok' if ply_ok else 'BAD'}",
        ok)
