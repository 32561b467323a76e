import numpy as np
import pytest

from rsmrecon import _kernels_py, kernels
from rsmrecon.denoise import Denoiser, DenoiserSpec, denoise, gaussian_blur

cvxpy = pytest.importorskip("cvxpy")


def tv_prox_oracle(v, tau):
    """Direct convex minimization of the prox objective on a small grid."""
    m, n = v.shape
    b = cvxpy.Variable((m, n))
    terms = []
    for i in range(m):
        for j in range(n):
            parts = [b[i, (j + 1) % n] - b[i, j]]
            if i < m - 1:
                parts.append(b[i + 1, j] - b[i, j])
            terms.append(cvxpy.norm(cvxpy.hstack(parts)))
    obj = cvxpy.Minimize(0.5 * cvxpy.sum_squares(b - v) + tau * sum(terms))
    cvxpy.Problem(obj).solve(solver=cvxpy.CLARABEL)
    return b.value


def test_identity_returns_input():
    rng = np.random.default_rng(0)
    img = rng.normal(size=(5, 7))
    out = denoise(DenoiserSpec("identity"), img, 3.0)
    assert np.array_equal(out, img)


@pytest.mark.parametrize("kind", ["gaussian", "median", "tv"])
def test_constant_image_is_fixed(kind):
    img = np.full((6, 9), 4.5)
    out = denoise(DenoiserSpec(kind), img, 1.3)
    assert np.max(np.abs(out - img)) <= 1e-10


def test_median_removes_single_impulse():
    img = np.zeros((9, 9))
    img[4, 4] = 1.0
    out = denoise(DenoiserSpec("median", radius=1), img, 1.0)
    assert np.array_equal(out, np.zeros((9, 9)))


def test_tv_prox_matches_direct_minimization():
    rng = np.random.default_rng(1)
    for trial in range(3):
        v = rng.normal(size=(4, 4)) * 2.0
        tau = [0.1, 0.4, 1.0][trial]
        ref = tv_prox_oracle(v, tau)
        out = kernels.tv_prox(v, tau, max_iter=5000, tol=1e-12)
        assert np.max(np.abs(out - ref)) <= 1e-4


def test_tv_prox_two_level_stripe():
    # 1-D-like image: two constant halves along the rows
    v = np.zeros((4, 4))
    v[:2, :] = 1.0
    ref = tv_prox_oracle(v, 0.2)
    out = kernels.tv_prox(v, 0.2, max_iter=5000, tol=1e-12)
    assert np.max(np.abs(out - ref)) <= 1e-4


def test_tv_zero_variance_is_identity():
    rng = np.random.default_rng(2)
    img = rng.normal(size=(5, 6))
    out = denoise(DenoiserSpec("tv"), img, 0.0)
    assert np.max(np.abs(out - img)) <= 1e-10


def test_gaussian_zero_width_is_identity():
    rng = np.random.default_rng(3)
    img = rng.normal(size=(5, 6))
    assert np.array_equal(gaussian_blur(img, 0.0), img)
    out = denoise(DenoiserSpec("gaussian", width_factor=0.0), img, 2.0)
    assert np.array_equal(out, img)


@pytest.mark.parametrize("kind", ["gaussian", "median"])
def test_sup_norm_bounded(kind):
    rng = np.random.default_rng(4)
    for _ in range(10):
        img = rng.normal(size=(8, 12)) * rng.uniform(0.1, 10)
        out = denoise(DenoiserSpec(kind), img, rng.uniform(0.0, 4.0))
        assert np.max(np.abs(out)) <= np.max(np.abs(img)) + 1e-9


def test_tv_prox_nonexpansive():
    rng = np.random.default_rng(5)
    spec = DenoiserSpec("tv", tv_max_iter=2000, tv_tol=1e-10)
    for _ in range(5):
        x = rng.normal(size=(6, 8))
        y = rng.normal(size=(6, 8))
        hx = denoise(spec, x, 0.5)
        hy = denoise(spec, y, 0.5)
        assert np.linalg.norm(hx - hy) <= np.linalg.norm(x - y) + 1e-6


def test_negative_variance_rejected():
    with pytest.raises(ValueError):
        denoise(DenoiserSpec("tv"), np.zeros((3, 3)), -1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        DenoiserSpec("wavelet")
    with pytest.raises(ValueError):
        DenoiserSpec("median", radius=0)
    with pytest.raises(ValueError):
        DenoiserSpec("external")


def test_kernel_backends_agree():
    rng = np.random.default_rng(6)
    img = rng.normal(size=(11, 17))
    tv_a = kernels.tv_prox(img, 0.7, max_iter=200, tol=0.0)
    tv_b = _kernels_py.tv_prox(img, 0.7, max_iter=200, tol=0.0)
    assert np.max(np.abs(tv_a - tv_b)) <= 1e-10
    med_a = kernels.median_filter(img, 2)
    med_b = _kernels_py.median_filter(img, 2)
    assert np.array_equal(med_a, med_b)
