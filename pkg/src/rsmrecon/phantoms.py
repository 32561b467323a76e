"""Ground-truth phantoms, synthetic DRMs, and noisy DRC simulation.

The image grid covers the sphere in angular coordinates: row i maps to
polar angle theta_i = pi (i + 0.5) / m, column j to azimuth
phi_j = 2 pi (j + 0.5) / n.  Shapes are defined by great-circle angle
from their center, so discs and rings placed near the poles span more
columns per row than equatorial ones (the viewing distortion of the
grid appears naturally).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import ResponseMatrix, apply_forward
from .tensor_io import as_matrix

SHAPES = ("disc", "ring", "square")


@dataclass(frozen=True)
class PhantomSpec:
    shape: str
    theta0: float                 # polar center, (0, pi)
    phi0: float                   # azimuth center, [0, 2 pi)
    radius: float                 # angular radius (ring: center radius)
    thickness: float = 0.0        # ring only
    half_width: float = 0.0       # square only
    amplitude: float = 1.0
    rows: int = 75
    cols: int = 180

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not (0.0 < self.theta0 < np.pi):
            raise ValueError("center polar angle must lie in (0, pi)")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.shape == "square":
            if self.half_width <= 0:
                raise ValueError("square needs half_width > 0")
            extent = np.sqrt(2.0) * self.half_width
        else:
            if self.radius <= 0:
                raise ValueError("radius must be positive")
            extent = self.radius
            if self.shape == "ring":
                if not (0.0 < self.thickness < self.radius):
                    raise ValueError("ring thickness must lie in (0, radius)")
                extent = self.radius + self.thickness / 2.0
        if self.theta0 - extent < 0.0 or self.theta0 + extent > np.pi:
            raise ValueError("shape exceeds the polar range (0, pi)")


def grid_angles(m, n):
    theta = np.pi * (np.arange(m) + 0.5) / m
    phi = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    return theta, phi


def direction(theta, phi):
    """Unit vector(s) for polar angle theta, azimuth phi (broadcasting)."""
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def great_circle_angle(theta, phi, theta0, phi0):
    """Angle between directions (theta, phi) and (theta0, phi0)."""
    dot = (np.sin(theta) * np.sin(theta0) * np.cos(phi - phi0)
           + np.cos(theta) * np.cos(theta0))
    return np.arccos(np.clip(dot, -1.0, 1.0))


def rasterize_phantom(spec: PhantomSpec) -> np.ndarray:
    m, n = spec.rows, spec.cols
    theta, phi = grid_angles(m, n)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    if spec.shape in ("disc", "ring"):
        delta = great_circle_angle(tt, pp, spec.theta0, spec.phi0)
        if spec.shape == "disc":
            mask = delta <= spec.radius
        else:
            mask = np.abs(delta - spec.radius) <= spec.thickness / 2.0
    else:
        # geodesic quadrilateral: gnomonic angular coordinates in the
        # tangent frame at the center must both stay within half_width
        center = direction(spec.theta0, spec.phi0)
        e_theta = np.array([np.cos(spec.theta0) * np.cos(spec.phi0),
                            np.cos(spec.theta0) * np.sin(spec.phi0),
                            -np.sin(spec.theta0)])
        e_phi = np.array([-np.sin(spec.phi0), np.cos(spec.phi0), 0.0])
        u = direction(tt, pp)
        z = u @ center
        x = u @ e_theta
        y = u @ e_phi
        mask = (z > 0) \
            & (np.abs(np.arctan2(x, z)) <= spec.half_width) \
            & (np.abs(np.arctan2(y, z)) <= spec.half_width)
    return np.where(mask, spec.amplitude, 0.0)


def make_test_suite(m=75, n=180, seed=0):
    """6 discs, 6 rings, 8 squares with seeded centers and sizes."""
    rng = np.random.default_rng(seed)
    suite = []
    for shape, count in (("disc", 6), ("ring", 6), ("square", 8)):
        for _ in range(count):
            while True:
                radius = rng.uniform(0.10, 0.30)
                thickness = rng.uniform(0.3, 0.6) * radius
                half_width = rng.uniform(0.08, 0.22)
                extent = {"disc": radius,
                          "ring": radius + thickness / 2.0,
                          "square": np.sqrt(2.0) * half_width}[shape]
                theta0 = rng.uniform(0.08 * np.pi, 0.92 * np.pi)
                phi0 = rng.uniform(0.0, 2.0 * np.pi)
                margin = np.pi / m  # keep at least one pixel row off the poles
                if not (extent + margin < theta0 < np.pi - extent - margin):
                    continue
                spec = PhantomSpec(shape, theta0, phi0, radius,
                                   thickness=thickness if shape == "ring" else 0.0,
                                   half_width=half_width if shape == "square" else 0.0,
                                   amplitude=1.0, rows=m, cols=n)
                image = rasterize_phantom(spec)
                if (image > 0).any():  # coarse grids can miss thin shapes
                    break
            suite.append((spec, image))
    return suite


@dataclass(frozen=True)
class DrmSynthSpec:
    rows: int = 75
    cols: int = 180
    baseline: float = 0.05
    peak_amplitude: float = 1.0
    angular_width: float = 0.2   # radians

    def __post_init__(self):
        if self.baseline < 0:
            raise ValueError("baseline must be nonnegative")
        if self.peak_amplitude <= 0 or self.angular_width <= 0:
            raise ValueError("peak amplitude and angular width must be positive")


def synth_drm(spec: DrmSynthSpec) -> ResponseMatrix:
    """Smooth directional response peaked at each row's first column.

    D[i,j] = baseline + peak * exp(-delta(i,j)^2 / (2 width^2)) with
    delta(i,j) the great-circle angle between voxel (i,j)'s direction
    and voxel (i,0)'s.  Stand-in for a measured/simulated DRM.
    """
    theta, phi = grid_angles(spec.rows, spec.cols)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    delta = great_circle_angle(tt, pp, tt[:, :1], phi[0])
    d = spec.baseline + spec.peak_amplitude * np.exp(
        -delta**2 / (2.0 * spec.angular_width**2))
    return ResponseMatrix(d)


@dataclass(frozen=True)
class NoiseSpec:
    target_mean_counts: float = 10000.0
    variance: float = 10000.0
    seed: int = 0
    noiseless: bool = False

    def __post_init__(self):
        if self.target_mean_counts <= 0:
            raise ValueError("target mean counts must be positive")
        if self.variance < 0:
            raise ValueError("noise variance must be nonnegative")


def simulate_drc(drm: ResponseMatrix, image, noise: NoiseSpec):
    """Scale the image so mean(Phi a) hits the count target, add noise.

    Returns (y, scale); the caller compares reconstructions against
    scale * image.  The generator is PCG64 seeded from noise.seed, so
    results are reproducible across platforms.
    """
    image = as_matrix(image)
    s0 = apply_forward(drm, image)
    mean0 = s0.mean()
    if mean0 <= 0:
        raise ValueError("image produces zero mean response; cannot scale "
                         "to the count target")
    scale = noise.target_mean_counts / mean0
    s = scale * s0
    if noise.noiseless:
        return s, scale
    rng = np.random.default_rng(noise.seed)
    y = s + rng.normal(0.0, np.sqrt(noise.variance), size=s.size)
    return y, scale
