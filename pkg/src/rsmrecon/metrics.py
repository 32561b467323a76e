"""NRMSE metric, benchmark harness, and report serialization."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .phantoms import NoiseSpec, simulate_drc
from .tensor_io import as_matrix

SHAPE_ORDER = ("disc", "ring", "square")


def nrmse(estimate, truth) -> float:
    """||estimate - truth||_2 / ||truth||_2."""
    estimate = as_matrix(estimate)
    truth = as_matrix(truth)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise ValueError("truth image is zero; NRMSE undefined")
    return float(np.linalg.norm(estimate - truth) / denom)


@dataclass(frozen=True)
class BenchmarkRow:
    phantom_id: int
    shape: str
    solver: str
    nrmse: float
    wall_ms: float
    seed: int


@dataclass
class BenchmarkReport:
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (phantom_id, solver, message)

    def solvers(self):
        seen = []
        for r in self.rows:
            if r.solver not in seen:
                seen.append(r.solver)
        return seen

    def average(self, solver, shape=None) -> float:
        vals = [r.nrmse for r in self.rows
                if r.solver == solver and (shape is None or r.shape == shape)]
        if not vals:
            return float("nan")
        return float(np.mean(vals))

    def to_markdown(self) -> str:
        solvers = self.solvers()
        lines = ["| Shape | " + " | ".join(solvers) + " |",
                 "|---" * (len(solvers) + 1) + "|"]
        for shape in SHAPE_ORDER:
            cells = [f"{self.average(s, shape):.3f}" for s in solvers]
            lines.append(f"| {shape.capitalize()} | " + " | ".join(cells) + " |")
        cells = [f"{self.average(s):.3f}" for s in solvers]
        lines.append("| Average | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"


def run_benchmark(suite, drm, solver_runners, noise: NoiseSpec,
                  on_progress=None) -> BenchmarkReport:
    """Simulate each phantom's DRC, run every solver, score NRMSE.

    ``solver_runners`` maps solver name to a callable (drm, y) -> image.
    Each phantom uses seed = noise.seed + phantom index, so the whole
    run is reproducible from one seed.  Solver failures are recorded
    and do not abort the run.
    """
    report = BenchmarkReport()
    for idx, (spec, image) in enumerate(suite):
        inst_noise = NoiseSpec(noise.target_mean_counts, noise.variance,
                               noise.seed + idx, noise.noiseless)
        y, scale = simulate_drc(drm, image, inst_noise)
        truth = scale * image
        for name in solver_runners:
            t0 = time.monotonic()
            try:
                recon = solver_runners[name](drm, y)
            except Exception as e:  # noqa: BLE001 - failures are data here
                report.errors.append((idx, name, str(e)))
                continue
            wall_ms = 1000.0 * (time.monotonic() - t0)
            report.rows.append(BenchmarkRow(idx, spec.shape, name,
                                            nrmse(recon, truth), wall_ms,
                                            inst_noise.seed))
            if on_progress is not None:
                on_progress(idx, name, report.rows[-1])
    report.rows.sort(key=lambda r: (r.phantom_id, r.solver))
    return report


CSV_HEADER = "phantom_id,shape,solver,nrmse,wall_ms,seed"


def write_report(report: BenchmarkReport, path, format="csv"):
    if format == "csv":
        with open(path, "w") as f:
            f.write(CSV_HEADER + "\n")
            for r in report.rows:
                f.write(f"{r.phantom_id},{r.shape},{r.solver},"
                        f"{r.nrmse:.17g},{r.wall_ms:.17g},{r.seed}\n")
    elif format == "markdown":
        with open(path, "w") as f:
            f.write(report.to_markdown())
    else:
        raise ValueError(f"unknown report format {format!r}")


def read_report(path) -> BenchmarkReport:
    report = BenchmarkReport()
    with open(path) as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in f:
            if not line.strip():
                continue
            pid, shape, solver, err, wall, seed = line.strip().split(",")
            report.rows.append(BenchmarkRow(int(pid), shape, solver,
                                            float(err), float(wall), int(seed)))
    return report
