"""Command-line entry point.

Subcommands: phantom, synth-drm, simulate, reconstruct, bench.  Every
command writes a flat key=value manifest next to its outputs so a run
can be reproduced from the manifest alone.  Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .denoise import DenoiserSpec, external_command_default
from .forward import ResponseMatrix
from .metrics import NoiseSpec, run_benchmark, write_report
from .phantoms import (DrmSynthSpec, PhantomSpec, make_test_suite,
                       rasterize_phantom, simulate_drc, synth_drm)
from .solvers import AdmmConfig, MlemConfig, reconstruct_l1, reconstruct_l1_dnn
from .solvers import reconstruct_mlem_mrp
from .tensor_io import export_grayscale, read_matrix, read_signal, write_matrix
from .tensor_io import write_signal

SOLVER_NAMES = ("mlem-mrp", "l1", "l1-dnn")

# Benchmark-scale hyperparameters: measurements are scaled to an average
# of 10000 counts, so useful penalty weights are far larger than the
# unit-scale reconstruct defaults.
BENCH_LAMBDA = 150.0
BENCH_GAMMA = 150.0
BENCH_MLEM_BETA = 0.3


def _write_manifest(path, entries):
    with open(path, "w") as f:
        f.write(f"tool_version={__version__}\n")
        for key, value in entries.items():
            f.write(f"{key}={value}\n")


def _add_grid_args(p):
    p.add_argument("--m", type=int, default=75, help="image rows (polar bins)")
    p.add_argument("--n", type=int, default=180, help="image cols (azimuth bins)")


def cmd_phantom(args):
    out = Path(args.out)
    if args.suite:
        out.mkdir(parents=True, exist_ok=True)
        suite = make_test_suite(args.m, args.n, args.seed)
        for idx, (spec, image) in enumerate(suite):
            write_matrix(image, out / f"phantom_{idx:02d}_{spec.shape}.rsm")
        _write_manifest(out / "manifest.txt", {
            "command": "phantom", "suite": "true", "m": args.m, "n": args.n,
            "seed": args.seed, "count": len(suite), "out": out,
        })
        return 0
    spec = PhantomSpec(args.shape, args.theta0, args.phi0, args.radius,
                       thickness=args.thickness, half_width=args.half_width,
                       amplitude=args.amplitude, rows=args.m, cols=args.n)
    write_matrix(rasterize_phantom(spec), out)
    _write_manifest(str(out) + ".manifest", {
        "command": "phantom", "shape": spec.shape, "theta0": spec.theta0,
        "phi0": spec.phi0, "radius": spec.radius, "thickness": spec.thickness,
        "half_width": spec.half_width, "amplitude": spec.amplitude,
        "m": args.m, "n": args.n, "out": out,
    })
    return 0


def cmd_synth_drm(args):
    spec = DrmSynthSpec(args.m, args.n, args.baseline, args.peak, args.width)
    write_matrix(synth_drm(spec).drm, args.out)
    _write_manifest(args.out + ".manifest", {
        "command": "synth-drm", "m": args.m, "n": args.n,
        "baseline": args.baseline, "peak": args.peak, "width": args.width,
        "out": args.out,
    })
    return 0


def cmd_simulate(args):
    drm = ResponseMatrix(read_matrix(args.drm))
    image = read_matrix(args.image)
    noise = NoiseSpec(args.target_mean, args.variance, args.seed, args.noiseless)
    y, scale = simulate_drc(drm, image, noise)
    write_signal(y, args.out)
    _write_manifest(args.out + ".manifest", {
        "command": "simulate", "drm": args.drm, "image": args.image,
        "seed": args.seed, "target_mean": args.target_mean,
        "variance": args.variance, "noiseless": args.noiseless,
        "scale": repr(scale), "out": args.out,
    })
    return 0


def _denoiser_spec(args):
    if args.denoiser == "external":
        cmd = tuple(args.denoiser_cmd.split()) if args.denoiser_cmd \
            else external_command_default()
        if not cmd:
            raise ValueError("external denoiser needs --denoiser-cmd or "
                             "RSM_DENOISER_CMD")
        return DenoiserSpec("external", command=cmd)
    return DenoiserSpec(args.denoiser)


def cmd_reconstruct(args):
    drm = ResponseMatrix(read_matrix(args.drm))
    y = read_signal(args.drc)
    if args.method == "mlem-mrp":
        cfg = MlemConfig(iterations=args.iters, beta=args.beta,
                         median_radius=args.median_radius)
        recon, trace = reconstruct_mlem_mrp(drm, y, cfg)
    else:
        cfg = AdmmConfig(lam=args.lam, gamma=args.gamma, iterations=args.iters,
                         rho_start=args.rho_start, rho_end=args.rho_end,
                         denoiser=_denoiser_spec(args))
        solver = reconstruct_l1_dnn if args.method == "l1-dnn" else reconstruct_l1
        recon, trace = solver(drm, y, cfg)
    out = Path(args.out)
    write_matrix(recon, out)
    export_grayscale(recon, out.with_suffix(".pgm"))
    trace.write_csv(out.with_suffix(".trace.csv"))
    _write_manifest(str(out) + ".manifest", {
        "command": "reconstruct", "method": args.method, "drm": args.drm,
        "drc": args.drc, "lambda": args.lam, "gamma": args.gamma,
        "iters": args.iters, "rho_start": args.rho_start,
        "rho_end": args.rho_end, "denoiser": args.denoiser,
        "denoiser_cmd": args.denoiser_cmd or "", "beta": args.beta,
        "median_radius": args.median_radius, "out": out,
    })
    return 0


def bench_runners(names, args):
    """Solver callables for the benchmark, keyed by CLI name."""
    runners = {}
    for name in names:
        if name == "mlem-mrp":
            cfg = MlemConfig(iterations=args.iters, beta=args.beta)
            runners[name] = lambda drm, y, c=cfg: reconstruct_mlem_mrp(drm, y, c)[0]
        elif name == "l1":
            cfg = AdmmConfig(lam=args.lam, gamma=0.0, iterations=args.iters,
                             denoiser=DenoiserSpec("identity"))
            runners[name] = lambda drm, y, c=cfg: reconstruct_l1(drm, y, c)[0]
        elif name == "l1-dnn":
            cfg = AdmmConfig(lam=args.lam, gamma=args.gamma,
                             iterations=args.iters, denoiser=_denoiser_spec(args))
            runners[name] = lambda drm, y, c=cfg: reconstruct_l1_dnn(drm, y, c)[0]
        else:
            raise ValueError(f"unknown solver {name!r}")
    return runners


def cmd_bench(args):
    names = [s.strip() for s in args.solvers.split(",") if s.strip()]
    suite = make_test_suite(args.m, args.n, args.seed)
    drm = synth_drm(DrmSynthSpec(args.m, args.n))
    noise = NoiseSpec(seed=args.seed, noiseless=args.noiseless)
    progress = None
    if args.verbose:
        def progress(idx, name, row):
            print(f"phantom {idx:2d} {row.shape:6s} {name:8s} "
                  f"nrmse={row.nrmse:.3f} ({row.wall_ms:.0f} ms)", flush=True)
    report = run_benchmark(suite, drm, bench_runners(names, args), noise,
                           on_progress=progress)
    write_report(report, args.out, format="csv")
    md_path = str(Path(args.out).with_suffix(".md"))
    write_report(report, md_path, format="markdown")
    _write_manifest(args.out + ".manifest", {
        "command": "bench", "seed": args.seed, "m": args.m, "n": args.n,
        "solvers": ",".join(names), "iters": args.iters, "lambda": args.lam,
        "gamma": args.gamma, "beta": args.beta, "denoiser": args.denoiser,
        "noiseless": args.noiseless, "out": args.out, "markdown": md_path,
        "warnings": len(report.errors),
    })
    for pid, solver, message in report.errors:
        print(f"warning: phantom {pid} solver {solver} failed: {message}",
              file=sys.stderr)
    if report.errors and not report.rows:
        return 1
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rsm", description="Rotating scatter mask image reconstruction")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="rasterize a phantom or the 20-image suite")
    p.add_argument("--shape", choices=("disc", "ring", "square"), default="disc")
    _add_grid_args(p)
    p.add_argument("--theta0", type=float, default=np.pi / 2)
    p.add_argument("--phi0", type=float, default=np.pi)
    p.add_argument("--radius", type=float, default=0.2)
    p.add_argument("--thickness", type=float, default=0.0)
    p.add_argument("--half-width", type=float, default=0.0, dest="half_width")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--suite", action="store_true",
                   help="emit all 20 suite phantoms into --out directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("synth-drm", help="generate a synthetic response matrix")
    _add_grid_args(p)
    p.add_argument("--baseline", type=float, default=0.05)
    p.add_argument("--peak", type=float, default=1.0)
    p.add_argument("--width", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_drm)

    p = sub.add_parser("simulate", help="simulate a noisy detector response curve")
    p.add_argument("--drm", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-mean", type=float, default=10000.0,
                   dest="target_mean")
    p.add_argument("--variance", type=float, default=10000.0)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="run one solver on a DRM/DRC pair")
    p.add_argument("--method", choices=SOLVER_NAMES, required=True)
    p.add_argument("--drm", required=True)
    p.add_argument("--drc", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", type=float, default=0.36, dest="lam")
    p.add_argument("--gamma", type=float, default=0.23)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--rho-start", type=float, default=0.05, dest="rho_start")
    p.add_argument("--rho-end", type=float, default=5.0, dest="rho_end")
    p.add_argument("--denoiser", default="tv",
                   choices=("tv", "gaussian", "median", "identity", "external"))
    p.add_argument("--denoiser-cmd", default=None, dest="denoiser_cmd")
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--median-radius", type=int, default=1, dest="median_radius")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("bench", help="run the phantom suite across solvers")
    p.add_argument("--seed", type=int, default=0)
    _add_grid_args(p)
    p.add_argument("--solvers", default=",".join(SOLVER_NAMES))
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--lambda", type=float, default=BENCH_LAMBDA, dest="lam")
    p.add_argument("--gamma", type=float, default=BENCH_GAMMA)
    p.add_argument("--beta", type=float, default=BENCH_MLEM_BETA)
    p.add_argument("--denoiser", default="tv",
                   choices=("tv", "gaussian", "median", "identity", "external"))
    p.add_argument("--denoiser-cmd", default=None, dest="denoiser_cmd")
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"rsm {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
