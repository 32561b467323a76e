"""Pure numpy implementations of the hot per-iteration kernels.

Same contracts as the compiled extension ``rsmrecon._kernels``; the
active backend is chosen in :mod:`rsmrecon.kernels`.

Boundary convention for both kernels: rows (polar axis) replicate,
columns (azimuth axis) wrap.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "python"


def _grad(u):
    m, _ = u.shape
    gx = np.zeros_like(u)
    gx[: m - 1, :] = u[1:, :] - u[: m - 1, :]
    gy = np.roll(u, -1, axis=1) - u
    return gx, gy


def _div(px, py):
    dx = px.copy()
    dx[1:, :] -= px[:-1, :]
    dy = py - np.roll(py, 1, axis=1)
    return dx + dy


def tv_prox(v, tau, max_iter=50, tol=1e-5):
    """Prox of tau * isotropic TV via Chambolle's dual projection.

    Iterates until the max-norm change of the dual field drops below
    ``tol`` or ``max_iter`` sweeps elapse.  Returns v unchanged for
    tau == 0.
    """
    v = np.asarray(v, dtype=np.float64)
    if tau <= 0:
        return v.copy()
    px = np.zeros_like(v)
    py = np.zeros_like(v)
    sigma = 0.249
    for _ in range(int(max_iter)):
        gx, gy = _grad(_div(px, py) - v / tau)
        norm = np.sqrt(gx**2 + gy**2)
        px_new = (px + sigma * gx) / (1.0 + sigma * norm)
        py_new = (py + sigma * gy) / (1.0 + sigma * norm)
        delta = max(np.max(np.abs(px_new - px)), np.max(np.abs(py_new - py)))
        px, py = px_new, py_new
        if delta < tol:
            break
    return v - tau * _div(px, py)


def median_filter(a, radius=1):
    """(2r+1)^2 median window, rows replicated, columns wrapped."""
    a = np.asarray(a, dtype=np.float64)
    r = int(radius)
    padded = np.pad(a, ((r, r), (0, 0)), mode="edge")
    padded = np.pad(padded, ((0, 0), (r, r)), mode="wrap")
    size = 2 * r + 1
    windows = sliding_window_view(padded, (size, size))
    return np.median(windows, axis=(2, 3))
