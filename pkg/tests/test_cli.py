import json

import numpy as np
import pytest

from elastisph.cli import EXIT_OK, EXIT_VALIDATION, main
from elastisph.presets import three_sphere_config
from elastisph.problem import save_config


@pytest.fixture
def table3_path(tmp_path):
    path = tmp_path / "table3.json"
    save_config(three_sphere_config(3), path)
    return path


def test_solve_preset(tmp_path):
    out = tmp_path / "run"
    rc = main(["solve", "--preset", "one_sphere_case1", "--degree", "3",
               "--out-dir", str(out)])
    assert rc == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["spectra_mode"] == "self_consistent"
    assert manifest["degree"] == 3
    assert (out / "coefficients.csv").exists()


def test_solve_config_file(table3_path, tmp_path):
    out = tmp_path / "run"
    rc = main(["solve", "--config", str(table3_path), "--out-dir", str(out)])
    assert rc == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["minimum_gap"] == pytest.approx(0.9)
    assert manifest["iterations"] is None  # direct solver default


def test_solver_flag_and_mode_recorded(table3_path, tmp_path):
    out = tmp_path / "run"
    rc = main(["solve", "--config", str(table3_path), "--solver", "iterative",
               "--tol", "1e-8", "--spectra-mode", "as_printed", "--out-dir", str(out)])
    assert rc == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["spectra_mode"] == "as_printed"
    assert manifest["iterations"] >= 1


def test_validation_failure_exit_code(tmp_path, capsys):
    cfg = three_sphere_config(3)
    bad = cfg.spheres[0].__class__(
        id=1, frame=cfg.spheres[1].frame, role="neumann", data=cfg.spheres[1].data)
    from elastisph.problem import ProblemConfig
    bad_cfg = ProblemConfig(
        spheres=(bad,) + cfg.spheres[1:], background=cfg.background, degree=3)
    path = tmp_path / "bad.json"
    save_config(bad_cfg, path)
    rc = main(["solve", "--config", str(path), "--out-dir", str(tmp_path / "o")])
    assert rc == EXIT_VALIDATION
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "validation"
    assert any("overlap" in line for line in err["detail"])


def test_missing_input(tmp_path):
    rc = main(["solve", "--out-dir", str(tmp_path)])
    assert rc == EXIT_VALIDATION


def test_deterministic_outputs(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        rc = main(["solve", "--preset", "table3_smooth", "--degree", "3",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK
    assert (out1 / "coefficients.csv").read_bytes() == (out2 / "coefficients.csv").read_bytes()


def test_one_sphere_command(tmp_path):
    out = tmp_path / "os"
    rc = main(["one-sphere", "--case", "1", "--degrees", "2,5", "--out-dir", str(out)])
    assert rc == EXIT_OK
    rows = (out / "one_sphere_case1.csv").read_text().strip().splitlines()
    assert rows[0].startswith("N,relative_error")
    for line in rows[1:]:
        assert float(line.split(",")[1]) < 1e-12


def test_convergence_command(table3_path, tmp_path):
    out = tmp_path / "conv"
    rc = main(["convergence", "--config", str(table3_path), "--degrees", "2,4",
               "--reference", "6", "--out-dir", str(out)])
    assert rc == EXIT_OK
    rows = (out / "convergence.csv").read_text().strip().splitlines()
    assert len(rows) == 3
    assert rc == EXIT_OK


def test_convergence_bad_reference(table3_path, tmp_path):
    rc = main(["convergence", "--config", str(table3_path), "--degrees", "2,4",
               "--reference", "4", "--out-dir", str(tmp_path)])
    assert rc == EXIT_VALIDATION


def test_benchmark_small(tmp_path):
    out = tmp_path / "bench"
    rc = main(["benchmark", "--radii", "1", "--out-dir", str(out)])
    assert rc == EXIT_OK
    rows = (out / "benchmark.csv").read_text().strip().splitlines()
    assert rows[1].split(",")[1] == "2"  # sphere count at R=1


def test_sweep_poisson_small(tmp_path):
    out = tmp_path / "sweep"
    rc = main(["sweep-poisson", "--nu0", "0.25", "--steps", "3",
               "--nu1-min", "-0.5", "--nu1-max", "0.4", "--out-dir", str(out)])
    assert rc == EXIT_OK
    rows = (out / "poisson_sweep.csv").read_text().strip().splitlines()
    assert len(rows) == 4
    norms = [float(r.split(",")[3]) for r in rows[1:]]
    assert all(np.isfinite(norms))
