"""Forward model of the RSM acquisition and its FFT machinery.

The detector response matrix (DRM) D is m x n; row i is the circular
convolution kernel applied to image row i, and the measured curve is the
sum over rows:

    s[j] = sum_i sum_k D[i,k] * A[i,(j-k) mod n]

The operator (here ``apply_forward``) is a horizontal concatenation of
circulant blocks, so its gram matrix is circulant and the regularized
normal equations (Phi'Phi + rho I) a = x diagonalize per frequency.
DFT convention: forward transform unnormalized, inverse carries 1/n
(numpy's default).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .tensor_io import as_matrix, as_signal


class DimensionError(ValueError):
    """Operand shapes do not agree with the DRM."""


# rows per FFT chunk in the regularized solve: keep per-chunk complex
# temporaries around 256 KB so they stay in L2 even for long signals
_CHUNK_COMPLEX = 16384


@dataclass(frozen=True)
class ResponseMatrix:
    """Validated DRM wrapper; ``drm`` is m x n with nonnegative entries."""

    drm: np.ndarray

    def __post_init__(self):
        d = as_matrix(self.drm)
        if d.shape[1] < 2:
            raise DimensionError("DRM needs at least 2 columns")
        if np.any(d < 0):
            raise ValueError("DRM entries must be nonnegative")
        object.__setattr__(self, "drm", d)
        if not np.any(d > 0):
            warnings.warn("all-zero DRM: forward operator is degenerate", stacklevel=2)

    @property
    def shape(self):
        return self.drm.shape

    @property
    def degenerate(self) -> bool:
        return not np.any(self.drm > 0)


@dataclass(frozen=True)
class SpectralPlan:
    """Per-row DRM spectra plus the frequency-domain solve denominator.

    ``denom = 1 + power_sum / rho`` where ``power_sum[f] = sum_i |F(d_i)[f]|^2``.
    All operands are real, so spectra are stored over the nonnegative
    frequencies only (rfft layout, n//2 + 1 bins).
    """

    row_spectra: np.ndarray  # m x (n//2 + 1) complex
    power_sum: np.ndarray    # n//2 + 1 real
    rho: float
    denom: np.ndarray        # n//2 + 1 real, >= 1

    def with_rho(self, rho: float) -> "SpectralPlan":
        """Rebuild the denominator for a new rho, reusing the spectra."""
        if rho <= 0:
            raise ValueError(f"rho must be positive, got {rho}")
        if rho == self.rho:
            return self
        return SpectralPlan(self.row_spectra, self.power_sum, float(rho),
                            1.0 + self.power_sum / rho)


def build_spectral_plan(drm: ResponseMatrix, rho: float) -> SpectralPlan:
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    spectra = np.fft.rfft(drm.drm, axis=1)
    power_sum = np.sum(np.abs(spectra) ** 2, axis=0)
    return SpectralPlan(spectra, power_sum, float(rho), 1.0 + power_sum / rho)


def apply_forward(drm: ResponseMatrix, image) -> np.ndarray:
    """Phi: sum over rows of circular convolution of D[i,:] with A[i,:]."""
    a = as_matrix(image)
    if a.shape != drm.shape:
        raise DimensionError(f"image shape {a.shape} != DRM shape {drm.shape}")
    n = drm.shape[1]
    spectra = np.fft.rfft(drm.drm, axis=1)
    return np.fft.irfft(np.sum(spectra * np.fft.rfft(a, axis=1), axis=0), n=n)


def apply_forward_direct(drm: ResponseMatrix, image) -> np.ndarray:
    """Direct O(m n^2) summation; reference path for the FFT product."""
    a = as_matrix(image)
    if a.shape != drm.shape:
        raise DimensionError(f"image shape {a.shape} != DRM shape {drm.shape}")
    m, n = drm.shape
    s = np.zeros(n)
    d = drm.drm
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += d[i, k] * a[i, (j - k) % n]
            s[j] += acc
    return s


def apply_adjoint(drm: ResponseMatrix, sig) -> np.ndarray:
    """Phi': G[i,k] = sum_j D[i,(j-k) mod n] * sig[j] (circular correlation)."""
    y = as_signal(sig)
    m, n = drm.shape
    if y.size != n:
        raise DimensionError(f"signal length {y.size} != DRM cols {n}")
    fy = np.fft.rfft(y)
    return np.fft.irfft(np.conj(np.fft.rfft(drm.drm, axis=1)) * fy[None, :],
                        n=n, axis=1)


def solve_regularized_normal(plan: SpectralPlan, drm: ResponseMatrix, x) -> np.ndarray:
    """Solve (Phi'Phi + rho I) a = x in O(m n log n).

    Uses the matrix inversion lemma: Phi Phi' is circulant with spectrum
    ``power_sum``, so

        a = x/rho - (1/rho^2) Phi' F^-1{ F(Phi x) / denom }.

    Rows are transformed in chunks sized so the complex temporaries stay
    cache-resident at large n (a single pass at typical image sizes).
    """
    x = as_matrix(x)
    m, n = drm.shape
    if x.shape != (m, n):
        raise DimensionError(f"x shape {x.shape} != DRM shape {drm.shape}")
    spectra = plan.row_spectra
    nf = n // 2 + 1
    if spectra.shape != (m, nf):
        raise DimensionError("spectral plan does not match DRM dimensions")
    rho = plan.rho
    chunk = max(1, _CHUNK_COMPLEX // nf)
    f_phix = np.zeros(nf, dtype=complex)
    for i0 in range(0, m, chunk):
        fx = np.fft.rfft(x[i0:i0 + chunk], axis=1)
        f_phix += np.sum(spectra[i0:i0 + chunk] * fx, axis=0)
    g = (f_phix / plan.denom)[None, :]
    corr = np.empty_like(x)
    for i0 in range(0, m, chunk):
        corr[i0:i0 + chunk] = np.fft.irfft(np.conj(spectra[i0:i0 + chunk]) * g,
                                           n=n, axis=1)
    return x / rho - corr / rho**2
