"""The three reconstruction algorithms compared by the benchmark.

* ``reconstruct_l1_dnn``  ADMM with a three-term objective
  1/2||y - Phi a||^2 + lambda ||a||_1 + gamma * denoiser pseudo-prior,
  split as a = b (soft-threshold branch) and a = c (denoiser branch).
* ``reconstruct_l1``      single-split ADMM for the lasso objective.
* ``reconstruct_mlem_mrp`` multiplicative EM with a one-step-late median
  root prior correction.

All solvers are deterministic: identical inputs and configuration give
bitwise-identical outputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .denoise import Denoiser, DenoiserSpec
from .forward import (ResponseMatrix, apply_adjoint, apply_forward,
                      build_spectral_plan)
from .forward import solve_regularized_normal
from .tensor_io import as_signal


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class AdmmConfig:
    lam: float = 0.36
    gamma: float = 0.23
    iterations: int = 300
    rho_start: float = 0.05
    rho_end: float = 5.0
    denoiser: DenoiserSpec = field(default_factory=DenoiserSpec)
    clamp_output: bool = True

    def __post_init__(self):
        if self.lam < 0 or self.gamma < 0:
            raise ValueError("lambda and gamma must be nonnegative")
        if self.iterations < 1:
            raise ValueError("iteration count must be >= 1")
        if not (0 < self.rho_start <= self.rho_end):
            raise ValueError("need 0 < rho_start <= rho_end")

    def rho(self, k):
        """Geometric penalty schedule, k in 1..K."""
        if self.iterations == 1:
            return self.rho_start
        frac = (k - 1) / (self.iterations - 1)
        return self.rho_start * (self.rho_end / self.rho_start) ** frac


@dataclass(frozen=True)
class MlemConfig:
    iterations: int = 300
    beta: float = 0.3
    median_radius: int = 1
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.iterations < 1 or self.median_radius < 1:
            raise ValueError("iterations and median radius must be >= 1")
        if self.beta < 0 or self.epsilon <= 0:
            raise ValueError("beta >= 0 and epsilon > 0 required")


@dataclass
class SolverTrace:
    """Per-iteration diagnostics; one record per completed iteration."""

    rho: list = field(default_factory=list)
    res_b: list = field(default_factory=list)     # ||b - a||_2
    res_c: list = field(default_factory=list)     # ||c - a||_2
    data_fit: list = field(default_factory=list)  # 1/2 ||y - Phi a||^2
    l1_term: list = field(default_factory=list)   # lambda ||a||_1

    COLUMNS = ("iter", "rho", "res_b", "res_c", "data_fit", "l1_term")

    def record(self, rho, res_b, res_c, data_fit, l1_term):
        self.rho.append(float(rho))
        self.res_b.append(float(res_b))
        self.res_c.append(float(res_c))
        self.data_fit.append(float(data_fit))
        self.l1_term.append(float(l1_term))

    def __len__(self):
        return len(self.rho)

    def rows(self):
        for k in range(len(self.rho)):
            yield (k + 1, self.rho[k], self.res_b[k], self.res_c[k],
                   self.data_fit[k], self.l1_term[k])

    def write_csv(self, path):
        with open(path, "w") as f:
            f.write(",".join(self.COLUMNS) + "\n")
            for row in self.rows():
                f.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                                 for v in row) + "\n")


def soft_threshold(x, t):
    """Elementwise sign(x) * max(|x| - t, 0), the prox of t * ||.||_1."""
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def reconstruct_l1_dnn(drm: ResponseMatrix, y, cfg: AdmmConfig):
    """Three-term ADMM fusing l1 sparsity with a pluggable denoiser."""
    m, n = drm.shape
    y = as_signal(y, n)
    phi_t_y = apply_adjoint(drm, y)
    a = np.zeros((m, n))
    b = np.zeros((m, n))
    c = np.zeros((m, n))
    w1 = np.zeros((m, n))
    w2 = np.zeros((m, n))
    plan = build_spectral_plan(drm, 1.0)
    trace = SolverTrace()
    with Denoiser(cfg.denoiser) as den:
        for k in range(1, cfg.iterations + 1):
            rho1 = rho2 = cfg.rho(k)
            rho = rho1 + rho2
            x = phi_t_y + rho1 * b + w1 + rho2 * c + w2
            a = solve_regularized_normal(plan.with_rho(rho), drm, x)
            b = soft_threshold(a - w1 / rho1, cfg.lam / rho1)
            w1 = w1 + rho1 * (b - a)
            try:
                c = den.denoise(a - w2 / rho2, cfg.gamma / rho2)
            except Exception as e:
                raise SolverError(f"denoiser failed at iteration {k}: {e}") from e
            w2 = w2 + rho2 * (c - a)
            residual = y - apply_forward(drm, a)
            trace.record(rho1, np.linalg.norm(b - a), np.linalg.norm(c - a),
                         0.5 * residual @ residual,
                         cfg.lam * np.abs(a).sum())
    if cfg.clamp_output:
        a = np.maximum(a, 0.0)
    return a, trace


def reconstruct_l1(drm: ResponseMatrix, y, cfg: AdmmConfig):
    """Single-split ADMM for 1/2||y - Phi a||^2 + lambda||a||_1."""
    m, n = drm.shape
    y = as_signal(y, n)
    phi_t_y = apply_adjoint(drm, y)
    a = np.zeros((m, n))
    b = np.zeros((m, n))
    w1 = np.zeros((m, n))
    plan = build_spectral_plan(drm, 1.0)
    trace = SolverTrace()
    for k in range(1, cfg.iterations + 1):
        rho1 = cfg.rho(k)
        x = phi_t_y + rho1 * b + w1
        a = solve_regularized_normal(plan.with_rho(rho1), drm, x)
        b = soft_threshold(a - w1 / rho1, cfg.lam / rho1)
        w1 = w1 + rho1 * (b - a)
        residual = y - apply_forward(drm, a)
        trace.record(rho1, np.linalg.norm(b - a), 0.0,
                     0.5 * residual @ residual, cfg.lam * np.abs(a).sum())
    if cfg.clamp_output:
        a = np.maximum(a, 0.0)
    return a, trace


def poisson_loglik(y, rate, epsilon=1e-12):
    """sum_i (y_i log r_i - r_i) with rates floored at epsilon."""
    r = np.maximum(rate, epsilon)
    return float(y @ np.log(r) - r.sum())


def reconstruct_mlem_mrp(drm: ResponseMatrix, y, cfg: MlemConfig):
    """MLEM with one-step-late median root prior.

    a_j <- a_j / (s_j p_j) * [Phi'(y / Phi a)]_j with sensitivity
    s = Phi' 1 and p_j = 1 + beta (a_j - med_j) / (med_j + eps).
    """
    from . import kernels

    m, n = drm.shape
    y = as_signal(y, n)
    if np.any(y < 0):
        raise ValueError("MLEM expects nonnegative counts")
    eps = cfg.epsilon
    sens = apply_adjoint(drm, np.ones(n))
    frozen = sens <= 0.0
    if frozen.any():
        warnings.warn(f"{int(frozen.sum())} pixels have zero sensitivity; "
                      "frozen at 0", stacklevel=2)
    total_response = drm.drm.sum()
    if total_response <= 0:
        raise ValueError("degenerate all-zero DRM: MLEM cannot start")
    a = np.full((m, n), max(y.sum() / total_response, eps))
    a[frozen] = 0.0
    trace = SolverTrace()
    for _ in range(cfg.iterations):
        fwd = apply_forward(drm, a)
        back = apply_adjoint(drm, y / np.maximum(fwd, eps))
        if cfg.beta > 0:
            med = kernels.median_filter(a, cfg.median_radius)
            prior = 1.0 + cfg.beta * (a - med) / (med + eps)
        else:
            prior = 1.0
        a = a * back / np.maximum(sens * prior, eps)
        a = np.maximum(a, 0.0)
        a[frozen] = 0.0
        trace.record(0.0, 0.0, 0.0, poisson_loglik(y, apply_forward(drm, a), eps),
                     0.0)
    return a, trace
