"""Rotating scatter mask (RSM) gamma image reconstruction.

A single scintillator behind a rotating attenuating mask time-encodes
source directions into a 1-D detector response curve (DRC).  This package
reconstructs the m x n angular source image from the length-n DRC using
an ADMM solver that fuses an l1 sparsity prior with a pluggable denoiser
prior, alongside MLEM-MRP and l1-only baselines, plus the phantom /
noise / benchmark harness used to compare them.
"""

__version__ = "0.1.0"
