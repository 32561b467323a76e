import sys

import numpy as np
import pytest

from rsmrecon.cli import main
from rsmrecon.metrics import nrmse, read_report
from rsmrecon.tensor_io import read_matrix, write_matrix, write_signal

ECHO_CMD = f"{sys.executable} -m rsmrecon.echo_server"


def run(argv):
    return main([str(a) for a in argv])


def test_phantom_single(tmp_path):
    out = tmp_path / "img.rsm"
    assert run(["phantom", "--shape", "disc", "--m", "20", "--n", "48",
                "--out", out]) == 0
    img = read_matrix(out)
    assert img.shape == (20, 48)
    assert (img > 0).any()
    manifest = (tmp_path / "img.rsm.manifest").read_text()
    assert "shape=disc" in manifest


def test_phantom_defaults_to_paper_grid(tmp_path):
    out = tmp_path / "img.rsm"
    assert run(["phantom", "--out", out]) == 0
    assert read_matrix(out).shape == (75, 180)


def test_phantom_suite(tmp_path):
    out = tmp_path / "suite"
    assert run(["phantom", "--suite", "--seed", 7, "--m", 20, "--n", 48,
                "--out", out]) == 0
    files = sorted(out.glob("phantom_*.rsm"))
    assert len(files) == 20
    assert (out / "manifest.txt").exists()


def test_invalid_shape_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run(["phantom", "--shape", "blob", "--out", tmp_path / "x.rsm"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_invalid_geometry_exits_nonzero(tmp_path):
    rc = run(["phantom", "--shape", "disc", "--theta0", 0.05,
              "--radius", 0.5, "--out", tmp_path / "x.rsm"])
    assert rc == 1


def test_synth_drm_and_simulate(tmp_path):
    drm_path = tmp_path / "drm.rsm"
    img_path = tmp_path / "img.rsm"
    y_path = tmp_path / "y.rsm"
    assert run(["synth-drm", "--m", 20, "--n", 48, "--out", drm_path]) == 0
    assert run(["phantom", "--m", 20, "--n", 48, "--out", img_path]) == 0
    assert run(["simulate", "--drm", drm_path, "--image", img_path,
                "--seed", 3, "--out", y_path]) == 0
    from rsmrecon.tensor_io import read_signal
    y = read_signal(y_path)
    assert y.shape == (48,)
    assert "scale=" in (tmp_path / "y.rsm.manifest").read_text()


def identity_problem(tmp_path, n=24):
    """Delta-kernel DRM: reconstruction should recover the DRC row."""
    drm = np.zeros((1, n))
    drm[0, 0] = 1.0
    drm_path = tmp_path / "drm.rsm"
    write_matrix(drm, drm_path)
    rng = np.random.default_rng(0)
    truth = np.abs(rng.normal(size=n)) + 0.5
    y_path = tmp_path / "y.rsm"
    write_signal(truth, y_path)
    return drm_path, y_path, truth


def test_reconstruct_l1_lambda_zero_exact(tmp_path):
    drm_path, y_path, truth = identity_problem(tmp_path)
    out = tmp_path / "rec.rsm"
    assert run(["reconstruct", "--method", "l1", "--lambda", 0,
                "--iters", 200, "--drm", drm_path, "--drc", y_path,
                "--out", out]) == 0
    rec = read_matrix(out)
    assert nrmse(rec, truth[None, :]) <= 1e-6
    assert (tmp_path / "rec.pgm").exists()
    assert (tmp_path / "rec.trace.csv").exists()


def test_reconstruct_external_echo_matches_identity(tmp_path):
    drm_path, y_path, _ = identity_problem(tmp_path)
    out_id = tmp_path / "rec_id.rsm"
    out_ext = tmp_path / "rec_ext.rsm"
    common = ["reconstruct", "--method", "l1-dnn", "--iters", 40,
              "--drm", drm_path, "--drc", y_path]
    assert run(common + ["--denoiser", "identity", "--out", out_id]) == 0
    assert run(common + ["--denoiser", "external",
                         "--denoiser-cmd", ECHO_CMD, "--out", out_ext]) == 0
    assert np.array_equal(read_matrix(out_id), read_matrix(out_ext))


def test_reconstruct_denoiser_cmd_env_default(tmp_path, monkeypatch):
    drm_path, y_path, _ = identity_problem(tmp_path)
    monkeypatch.setenv("RSM_DENOISER_CMD", ECHO_CMD)
    out = tmp_path / "rec.rsm"
    assert run(["reconstruct", "--method", "l1-dnn", "--iters", 5,
                "--denoiser", "external", "--drm", drm_path,
                "--drc", y_path, "--out", out]) == 0


def test_reconstruct_missing_input(tmp_path):
    rc = run(["reconstruct", "--method", "l1", "--drm", tmp_path / "no.rsm",
              "--drc", tmp_path / "no.rsm", "--out", tmp_path / "o.rsm"])
    assert rc == 1


def test_bench_deterministic_and_structured(tmp_path):
    args = ["bench", "--seed", 7, "--m", 16, "--n", 36, "--iters", 12,
            "--solvers", "l1,l1-dnn"]
    out1 = tmp_path / "r1.csv"
    out2 = tmp_path / "r2.csv"
    assert run(args + ["--out", out1]) == 0
    assert run(args + ["--out", out2]) == 0
    report = read_report(out1)
    assert len(report.rows) == 40
    assert {r.solver for r in report.rows} == {"l1", "l1-dnn"}
    # byte-identical apart from the informational wall_ms column
    strip = lambda p: [",".join(c for i, c in enumerate(l.split(",")) if i != 4)
                       for l in p.read_text().splitlines()]
    assert strip(out1) == strip(out2)
    md = (tmp_path / "r1.md").read_text()
    for label in ("| Disc |", "| Ring |", "| Square |", "| Average |"):
        assert label in md
