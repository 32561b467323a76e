"""Acceptance suite: one criterion per test, one PASS line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines
(including the measured benchmark averages).
"""

import time

import numpy as np
import pytest

from rsmrecon.cli import BENCH_GAMMA, BENCH_LAMBDA, build_parser, bench_runners
from rsmrecon.denoise import DenoiserSpec
from rsmrecon.forward import (ResponseMatrix, apply_adjoint, apply_forward,
                              build_spectral_plan, solve_regularized_normal)
from rsmrecon.metrics import NoiseSpec, run_benchmark
from rsmrecon.phantoms import (DrmSynthSpec, PhantomSpec, make_test_suite,
                               rasterize_phantom, simulate_drc, synth_drm)
from rsmrecon.solvers import (AdmmConfig, MlemConfig, reconstruct_l1,
                              reconstruct_mlem_mrp, soft_threshold)
from rsmrecon import kernels

from test_denoisers import tv_prox_oracle
from test_forward import dense_operator
from test_solvers import ista, lasso_objective


def ok(name, detail=""):
    print(f"PASS: {name}" + (f" ({detail})" if detail else ""))


def test_adjoint_identity_suite():
    rng = np.random.default_rng(100)
    t0 = time.monotonic()
    for _ in range(100):
        m = rng.integers(1, 9)
        n = rng.integers(2, 33)
        drm = ResponseMatrix(rng.random((m, n)))
        a = rng.normal(size=(m, n))
        y = rng.normal(size=n)
        lhs = apply_forward(drm, a) @ y
        rhs = (a * apply_adjoint(drm, y)).sum()
        bound = 1e-10 * (np.linalg.norm(a) * np.linalg.norm(y) + 1.0)
        assert abs(lhs - rhs) <= bound
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    ok("adjoint identity, 100 random instances", f"{elapsed:.2f}s")


def test_regularized_solve_vs_dense_oracle():
    rng = np.random.default_rng(101)
    t0 = time.monotonic()
    for _ in range(20):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(2, 26))
        if m * n > 200:
            n = max(2, 200 // m)
        drm = ResponseMatrix(rng.random((m, n)))
        x = rng.normal(size=(m, n))
        rho = float(rng.uniform(0.1, 3.0))
        fast = solve_regularized_normal(build_spectral_plan(drm, rho), drm, x)
        phi = dense_operator(drm)
        dense = np.linalg.solve(phi.T @ phi + rho * np.eye(m * n), x.ravel())
        assert np.linalg.norm(fast.ravel() - dense) <= 1e-8 * np.linalg.norm(dense)
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    ok("frequency-domain solve vs dense oracle, 20 instances", f"{elapsed:.2f}s")


def test_l1_solver_vs_proximal_gradient_oracle():
    rng = np.random.default_rng(102)
    for trial in range(10):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(6, 14))
        drm = ResponseMatrix(rng.random((m, n)))
        y = rng.normal(size=n)
        lam = float(rng.uniform(0.05, 0.5))
        cfg = AdmmConfig(lam=lam, gamma=0.0, iterations=800, rho_start=0.5,
                         rho_end=0.5, denoiser=DenoiserSpec("identity"),
                         clamp_output=False)
        a, _ = reconstruct_l1(drm, y, cfg)
        ref = ista(drm, y, lam, 100_000)
        obj = lasso_objective(drm, y, a, lam)
        obj_ref = lasso_objective(drm, y, ref, lam)
        assert abs(obj - obj_ref) <= 1e-4 * abs(obj_ref)
    ok("l1 ADMM objective vs long ISTA reference, 10 instances")


def test_mlem_monotonicity_and_nonnegativity():
    rng = np.random.default_rng(103)
    for trial in range(5):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(8, 16))
        drm = ResponseMatrix(rng.random((m, n)) + 0.05)
        truth = np.zeros((m, n))
        for _ in range(3):
            truth[rng.integers(m), rng.integers(n)] = rng.uniform(0.5, 3.0)
        y = np.maximum(apply_forward(drm, truth) + rng.normal(0, 0.02, n), 0.0)
        a, trace = reconstruct_mlem_mrp(drm, y,
                                        MlemConfig(iterations=200, beta=0.0))
        assert np.all(a >= 0)
        ll = trace.data_fit
        for k in range(len(ll) - 1):
            assert ll[k + 1] >= ll[k] - 1e-9 * (1.0 + abs(ll[k]))
    ok("MLEM log-likelihood monotone over 200 iterations, 5 instances")


def test_prox_correctness():
    grid = np.arange(-3.0, 3.0001, 1e-4)
    rng = np.random.default_rng(104)
    for t in (0.0, 0.25, 0.8, 1.5):
        for x in rng.uniform(-2.5, 2.5, size=5):
            brute = grid[np.argmin(0.5 * (grid - x) ** 2 + t * np.abs(grid))]
            assert abs(soft_threshold(np.array([x]), t)[0] - brute) <= 2e-4
    for tau in (0.15, 0.6):
        v = rng.normal(size=(4, 4)) * 1.5
        ref = tv_prox_oracle(v, tau)
        out = kernels.tv_prox(v, tau, max_iter=5000, tol=1e-12)
        assert np.max(np.abs(out - ref)) <= 1e-4
    ok("soft-threshold and TV prox match direct minimization")


def test_desk_scale_solver_ordering():
    m, n = 75, 180
    suite = make_test_suite(m, n, seed=0)
    drm = synth_drm(DrmSynthSpec(m, n))
    args = build_parser().parse_args(["bench", "--out", "unused.csv"])
    assert args.lam == BENCH_LAMBDA and args.gamma == BENCH_GAMMA
    runners = bench_runners(["mlem-mrp", "l1", "l1-dnn"], args)
    t0 = time.monotonic()
    report = run_benchmark(suite, drm, runners, NoiseSpec(seed=0))
    elapsed = time.monotonic() - t0
    assert not report.errors
    avg = {s: report.average(s) for s in ("mlem-mrp", "l1", "l1-dnn")}
    assert avg["l1-dnn"] < avg["l1"]
    assert avg["l1-dnn"] < avg["mlem-mrp"]
    assert elapsed < 600.0
    ok("desk-scale ordering on 20-phantom suite",
       f"l1-dnn {avg['l1-dnn']:.3f} < mlem-mrp {avg['mlem-mrp']:.3f} "
       f"< l1 {avg['l1']:.3f}; {elapsed:.0f}s")


def test_noise_calibration():
    drm = synth_drm(DrmSynthSpec(75, 180))
    img = rasterize_phantom(PhantomSpec("disc", np.pi / 2, 1.0, 0.3))
    s, _ = simulate_drc(drm, img, NoiseSpec(noiseless=True))
    assert abs(s.mean() - 10000.0) <= 1e-9
    y, _ = simulate_drc(drm, img, NoiseSpec(seed=42))
    residual_mean = (y - s).mean()
    bound = 4.0 * np.sqrt(10000.0 / 180.0)
    assert abs(residual_mean) <= bound
    ok("noise calibration",
       f"noiseless mean 10000 exact; residual mean {residual_mean:+.2f} "
       f"within +/-{bound:.1f}")


def test_fft_solve_scaling():
    rng = np.random.default_rng(105)
    m = 75
    cases = {}
    for n in (512, 1024):
        drm = ResponseMatrix(rng.random((m, n)))
        cases[n] = (build_spectral_plan(drm, 1.0), drm, rng.normal(size=(m, n)))
    samples = {512: [], 1024: []}
    for _ in range(3):  # warm-up
        for n in (512, 1024):
            solve_regularized_normal(*cases[n])
    # interleave the two sizes so both medians sample the same machine
    # state (CPU frequency, cache pressure from neighbours)
    for _ in range(101):
        for n in (512, 1024):
            t0 = time.perf_counter()
            solve_regularized_normal(*cases[n])
            samples[n].append(time.perf_counter() - t0)
    times = {n: float(np.median(samples[n])) for n in (512, 1024)}
    ratio = times[1024] / times[512]
    assert ratio < 2.5
    ok("image-update scaling",
       f"median {1000*times[512]:.2f}ms @ n=512 vs "
       f"{1000*times[1024]:.2f}ms @ n=1024, ratio {ratio:.2f} < 2.5")


def test_bench_csv_determinism(tmp_path):
    from rsmrecon.cli import main
    args = ["bench", "--seed", "7", "--m", "16", "--n", "36", "--iters",
            "12", "--solvers", "l1,l1-dnn,mlem-mrp"]
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0

    def stable(path):
        # wall_ms (column 4) is a wall-clock measurement and is the one
        # legitimately non-reproducible field
        return [",".join(c for i, c in enumerate(line.split(",")) if i != 4)
                for line in path.read_text().splitlines()]

    assert stable(out1) == stable(out2)
    assert out1.read_text().splitlines()[0] == \
        "phantom_id,shape,solver,nrmse,wall_ms,seed"
    ok("bench reproducibility", "identical CSV apart from wall-clock column")
