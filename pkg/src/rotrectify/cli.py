"""Command-line entry point.

Exit codes: 0 ok, 2 usage or input error, 3 scene generation failure,
4 estimation failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import fileio, imaging, metrics, pipeline, solver, synth
from .errors import (
    AllSamplesDegenerate,
    DimensionMismatch,
    NotEnoughMatches,
    RectificationError,
    UnrealizableScene,
)
from .geometry import CameraIntrinsics, centered_to_top_left

EXIT_OK, EXIT_USAGE, EXIT_SYNTH, EXIT_ESTIMATE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    return f"{v:.9g}"


def _scene_from_args(args) -> synth.SceneConfig:
    K = CameraIntrinsics(args.focal, args.focal, args.width, args.height)
    return synth.SceneConfig(
        radius=args.radius_m,
        depth_min=args.depth_min,
        depth_max=args.depth_max,
        roll_deg=getattr(args, "roll_deg", 0.0),
        pitch_deg=getattr(args, "pitch_deg", 0.0),
        n_points=args.points,
        noise_px=args.noise_px,
        seed=args.seed,
        intrinsics=K,
        outlier_fraction=args.outliers,
    )


def cmd_synth(args) -> int:
    cfg = _scene_from_args(args)
    pair = synth.generate(cfg)
    dims = cfg.intrinsics.dims
    prefix = args.out_prefix
    fileio.write_matches(f"{prefix}_matches.csv", pair.matches, dims)
    H1, H2 = pair.true_homographies
    rectified = pipeline.apply_to_matches(H1, H2, pair.matches)
    fileio.write_homographies(
        f"{prefix}_truth.json",
        H1,
        H2,
        dims,
        metrics.vae(rectified),
        (metrics.nvd(H1, dims), metrics.nvd(H2, dims)),
    )
    print(f"wrote {prefix}_matches.csv and {prefix}_truth.json ({len(pair.matches)} matches)")
    return EXIT_OK


def _ransac_from_args(args) -> pipeline.RansacConfig:
    return pipeline.RansacConfig(
        iterations=args.iters,
        seed=args.seed,
        early_exit_vae=args.early_exit,
        h23=args.h23,
        h22_mode=args.h22_mode,
        score=args.score,
    )


def cmd_rectify(args) -> int:
    dims = (args.width, args.height)
    matches = fileio.read_matches(args.matches, dims)
    result = pipeline.estimate(matches, dims, _ransac_from_args(args))
    fileio.write_homographies(
        args.out, result.H1, result.H2, dims, result.vae, (result.nvd_left, result.nvd_right)
    )
    print(
        f"vae={_fmt(result.vae)} nvd={_fmt(result.nvd_left)},{_fmt(result.nvd_right)} "
        f"iterations={result.iterations_used} -> {args.out}"
    )
    if args.left or args.right:
        if not (args.left and args.right):
            raise UsageError("--left and --right must be given together")
        left = imaging.read_pgm(args.left)
        right = imaging.read_pgm(args.right)
        if left.dims != dims or right.dims != dims:
            raise UsageError(f"images must be {dims[0]}x{dims[1]}, got {left.dims} and {right.dims}")
        H1 = centered_to_top_left(result.H1, dims)
        H2 = centered_to_top_left(result.H2, dims)
        out_dims, off1, off2 = imaging.common_bounds(H1, H2, dims)
        imaging.write_pgm(f"{args.out_prefix}_left.pgm", imaging.warp(left, H1, out_dims, off1))
        imaging.write_pgm(f"{args.out_prefix}_right.pgm", imaging.warp(right, H2, out_dims, off2))
        print(f"wrote {args.out_prefix}_left.pgm and {args.out_prefix}_right.pgm ({out_dims[0]}x{out_dims[1]})")
    return EXIT_OK


def cmd_eval(args) -> int:
    doc = fileio.read_homographies(args.homographies)
    if doc["frame"] != "centered":
        raise UsageError(
            f"{args.homographies}: frame {doc['frame']!r} does not match the centered frame "
            "match files are loaded into"
        )
    dims = doc["dims"]
    matches = fileio.read_matches(args.matches, dims)
    rectified = pipeline.apply_to_matches(doc["H1"], doc["H2"], matches)
    rep = metrics.report(rectified, doc["H1"], doc["H2"], dims)
    print("vae,nvd_left,nvd_right,n")
    print(f"{_fmt(rep.vae)},{_fmt(rep.nvd_left)},{_fmt(rep.nvd_right)},{rep.n_points}")
    return EXIT_OK


def cmd_depth(args) -> int:
    if args.block < 3 or args.block % 2 == 0:
        raise UsageError(f"--block must be odd and >= 3, got {args.block}")
    if args.max_disp < 0:
        raise UsageError(f"--max-disp must be >= 0, got {args.max_disp}")
    left = imaging.read_pgm(args.left)
    right = imaging.read_pgm(args.right)
    disp = imaging.block_disparity(left, right, args.block, args.max_disp)
    scale = 255.0 / args.max_disp if args.max_disp > 0 else 0.0
    shown = np.where(disp.valid, np.nan_to_num(disp.values) * scale, 0.0)
    out = Path(args.out)
    imaging.write_pgm(out, imaging.GrayImage(imaging.quantize(shown)))
    sidecar = out.with_suffix(".npy")
    np.save(sidecar, disp.values.astype(np.float32))
    print(f"wrote {out} and {sidecar} ({int(disp.valid.sum())} valid pixels)")
    return EXIT_OK


def bench_inputs(repeat: int, seed: int, dims=(960, 720)):
    """Deterministic list of non-degenerate two-point samples at the given size."""
    K = CameraIntrinsics(800.0, 800.0, dims[0], dims[1])
    pair = synth.generate(synth.SceneConfig(seed=seed, n_points=200, noise_px=0.5, intrinsics=K))
    rng = np.random.default_rng(seed)
    left, right = pair.matches.left.tolist(), pair.matches.right.tolist()
    samples = []
    while len(samples) < repeat:
        i, j = rng.choice(len(left), size=2, replace=False)
        m1 = (tuple(left[i]), tuple(right[i]))
        m2 = (tuple(left[j]), tuple(right[j]))
        try:
            solver.rectify_from_sample(m1, m2, dims)
        except RectificationError:
            continue
        samples.append((m1, m2))
    return samples


def time_chain(samples, dims=(960, 720)) -> np.ndarray:
    """Wall time in ms of the single-sample chain, one entry per sample."""
    chain = solver.rectify_from_sample
    times = np.empty(len(samples))
    clock = time.perf_counter_ns
    for k, (m1, m2) in enumerate(samples):
        t0 = clock()
        chain(m1, m2, dims)
        times[k] = clock() - t0
    return times / 1e6


def cmd_bench(args) -> int:
    if args.repeat < 1:
        raise UsageError(f"--repeat must be >= 1, got {args.repeat}")
    samples = bench_inputs(args.repeat, args.seed)
    times = time_chain(samples)
    header = "repeat,median_ms,mean_ms,p99_ms,min_ms"
    row = (
        f"{args.repeat},{_fmt(np.median(times))},{_fmt(np.mean(times))},"
        f"{_fmt(np.percentile(times, 99))},{_fmt(np.min(times))}"
    )
    print(header)
    print(row)
    if args.out:
        Path(args.out).write_text(header + "\n" + row + "\n")
    if args.figure:
        from . import plotting

        plotting.bench_figure(times, args.figure)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    grid = synth.standard_grid(args.grid_size, _scene_from_args(args))
    ransac = _ransac_from_args(args)
    rows = synth.sweep(grid, args.trials, ransac, master_seed=args.seed)
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=synth.SWEEP_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in row.items()})
    print(f"wrote {args.out} ({len(rows)} cells)")
    if args.figure:
        from . import plotting

        plotting.sweep_figure(
            rows, args.figure, title=f"noise {args.noise_px:g} px, {args.trials} trials per cell"
        )
        print(f"wrote {args.figure}")
    return EXIT_OK


def _add_scene_flags(p, points=50):
    p.add_argument("--radius-m", type=float, default=0.01)
    p.add_argument("--depth-min", type=float, default=0.5)
    p.add_argument("--depth-max", type=float, default=200.0)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--noise-px", type=float, default=0.0)
    p.add_argument("--outliers", type=float, default=0.0, help="fraction of matches replaced by outliers")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--width", type=int, default=960)
    p.add_argument("--height", type=int, default=720)
    p.add_argument("--focal", type=float, default=800.0)


def _add_ransac_flags(p, iters=1000):
    p.add_argument("--iters", type=int, default=iters)
    p.add_argument("--early-exit", type=float, default=0.05)
    p.add_argument("--h22-mode", choices=solver.H22_MODES, default="paper")
    p.add_argument("--h23", type=float, default=0.0)
    p.add_argument("--score", choices=pipeline.SCORES, default="unit-scale")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotrectify", description="Two-point stereo rectification for rotating cameras."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic match file and its ground truth")
    _add_scene_flags(p)
    p.add_argument("--roll-deg", type=float, default=10.0)
    p.add_argument("--pitch-deg", type=float, default=30.0)
    p.add_argument("--out-prefix", default="synth")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("rectify", help="estimate the rectifying homography pair")
    p.add_argument("--matches", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_ransac_flags(p)
    p.add_argument("--out", default="homographies.json")
    p.add_argument("--left")
    p.add_argument("--right")
    p.add_argument("--out-prefix", default="rectified")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("eval", help="print VAE and NVD for a match file under a homography file")
    p.add_argument("--matches", required=True)
    p.add_argument("--homographies", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("depth", help="block-matching disparity of a rectified PGM pair")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--block", type=int, default=7)
    p.add_argument("--max-disp", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("bench", help="time the single-sample estimation chain")
    p.add_argument("--repeat", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="synthetic parameter sweep to CSV (plus optional figure)")
    _add_scene_flags(p)
    _add_ransac_flags(p)
    p.add_argument("--grid-size", type=int, default=5)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnrealizableScene as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SYNTH
    except (NotEnoughMatches, AllSamplesDegenerate) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATE
    except (UsageError, DimensionMismatch, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RectificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATE


def run():
    sys.exit(main())
