"""Pluggable denoisers for the plug-and-play prior.

All denoisers receive a noise *variance* (the solver passes gamma/rho2)
and derive their strength from sqrt(variance):

* ``identity``  returns the input bitwise.
* ``gaussian``  separable blur, sigma = sqrt(variance) * width_factor.
* ``median``    (2r+1)^2 median window.
* ``tv``        prox of variance * TV(.) (Chambolle dual iterations).
* ``external``  round-trips through the bridge protocol.

Boundary convention everywhere: the azimuth axis (columns) wraps, the
polar axis (rows) replicates.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bridge import BridgeClient
from .tensor_io import as_matrix

KINDS = ("identity", "gaussian", "median", "tv", "external")


@dataclass(frozen=True)
class DenoiserSpec:
    kind: str = "tv"
    width_factor: float = 1.0        # gaussian: sigma scale on sqrt(variance)
    radius: int = 1                  # median window radius
    tv_max_iter: int = 50
    tv_tol: float = 1e-5
    command: tuple = ()              # external: argv of the server process
    timeout: float = 60.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown denoiser kind {self.kind!r}")
        if self.radius < 1:
            raise ValueError("median radius must be >= 1")
        if self.tv_max_iter < 1:
            raise ValueError("tv iterations must be >= 1")
        if self.tv_tol <= 0:
            raise ValueError("tv tolerance must be positive")
        if self.kind == "external" and not self.command:
            raise ValueError("external denoiser needs a server command")


def gaussian_kernel(sigma):
    """Normalized 1-D Gaussian taps, radius = max(1, ceil(4*sigma))."""
    radius = max(1, int(np.ceil(4.0 * sigma)))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (t / sigma) ** 2)
    return w / w.sum()


def gaussian_blur(image, sigma):
    """Separable Gaussian blur; rows replicate, columns wrap.

    Kept as a single explicit closed form so the out-of-process
    reference server can reproduce it exactly.
    """
    a = np.asarray(image, dtype=np.float64)
    if sigma <= 0:
        return a.copy()
    w = gaussian_kernel(sigma)
    radius = (len(w) - 1) // 2
    m, n = a.shape
    rows = np.arange(m)
    tmp = np.zeros_like(a)
    for t in range(-radius, radius + 1):
        tmp += w[t + radius] * a[np.clip(rows + t, 0, m - 1), :]
    cols = np.arange(n)
    out = np.zeros_like(a)
    for t in range(-radius, radius + 1):
        out += w[t + radius] * tmp[:, (cols + t) % n]
    return out


class Denoiser:
    """Callable denoiser bound to one spec; external kind owns a server."""

    def __init__(self, spec: DenoiserSpec):
        self.spec = spec
        self._client = None
        if spec.kind == "external":
            self._client = BridgeClient(list(spec.command), timeout=spec.timeout)

    def denoise(self, image, variance):
        image = as_matrix(image)
        if variance < 0 or not np.isfinite(variance):
            raise ValueError(f"noise variance must be finite and >= 0, got {variance}")
        kind = self.spec.kind
        if kind == "identity":
            return image
        if kind == "gaussian":
            return gaussian_blur(image, np.sqrt(variance) * self.spec.width_factor)
        if kind == "median":
            if variance == 0:
                return image.copy()
            return kernels.median_filter(image, self.spec.radius)
        if kind == "tv":
            return kernels.tv_prox(image, variance,
                                   max_iter=self.spec.tv_max_iter,
                                   tol=self.spec.tv_tol)
        return self._client.denoise(image, variance)

    def close(self):
        if self._client is not None:
            self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def denoise(spec: DenoiserSpec, image, variance):
    """One-shot convenience; solvers keep a Denoiser for the whole run."""
    with Denoiser(spec) as d:
        return d.denoise(image, variance)


def external_command_default():
    """Server argv from RSM_DENOISER_CMD, if set."""
    cmd = os.environ.get("RSM_DENOISER_CMD")
    return tuple(cmd.split()) if cmd else ()
