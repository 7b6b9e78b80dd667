import json

import numpy as np
import pytest

from affinebody.cli import main
from affinebody.grids import GridSpec
from affinebody.models import ReducedAmplitude, SectorLabel
from affinebody.wavefunc import write_amplitude


def test_reps_json(tmp_path):
    out = tmp_path / "reps.json"
    code = main(["reps", "--spin", "1/2", "--rotation-vector", "0,0,3.14159265358979",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["dimension"] == 2
    # S3 = diag(1/2, -1/2) as [re, im] pairs, row-major
    assert payload["S3"][0][0] == [0.5, 0.0]
    assert payload["S3"][1][1] == [-0.5, 0.0]
    # u(pi e3) = -i sigma3
    assert payload["su2_element"][0][0] == pytest.approx([0.0, -1.0], abs=1e-9)


def test_geometry_check(tmp_path):
    out = tmp_path / "geom.json"
    assert main(["geometry-check", "--seed", "7", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["seed"] == 7
    assert all(entry["pass"] for entry in payload["checks"])


def test_spectrum_roundtrip(tmp_path):
    csv_path = tmp_path / "spec.csv"
    json_path = tmp_path / "meta.json"
    coo_path = tmp_path / "op.txt"
    code = main([
        "spectrum", "--kind", "aff-aff", "--n", "2", "--A", "1", "--B", "0.5",
        "--m", "1", "--n-label", "2", "--grid", "0.5:2.5:12,-2.5:0.3:12",
        "--potential", "harmonic:kappa=1", "--levels", "3",
        "--out-csv", str(csv_path), "--out-json", str(json_path),
        "--export-matrix", str(coo_path),
    ])
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "level,energy,residual"
    assert len(lines) == 4
    meta = json.loads(json_path.read_text())
    assert meta["converged"] is True
    assert meta["config"]["kind"] == "aff-aff"
    assert meta["symmetry_defect"] <= 1e-12
    assert coo_path.read_text().startswith("#")


def test_spectrum_rejects_halfness_violation(tmp_path, capsys):
    code = main([
        "spectrum", "--kind", "aff-aff", "--n", "3", "--A", "1", "--B", "0.5",
        "--s", "1/2", "--j", "1", "--grid", "0.5:2.5:8,-1:0.4:8,-2.5:-1.1:8",
    ])
    assert code == 1
    assert "half-integer" in capsys.readouterr().err


def test_unknown_flag_is_validation_error():
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--bogus-flag", "1"])
    assert exc.value.code == 1


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "kind = aff-aff\nn = 2\nA = 1.0\nB = 0.5\nm = 0\nn-label = 0\n"
        "grid = 0.5:2.5:10,-2.5:0.3:10\nlevels = 2\n"
    )
    json_path = tmp_path / "meta.json"
    code = main(["spectrum", "--config", str(cfg), "--levels", "3",
                 "--out-csv", str(tmp_path / "s.csv"), "--out-json", str(json_path)])
    assert code == 0
    meta = json.loads(json_path.read_text())
    assert meta["config"]["levels"] == "3"  # flag wins over the file


def test_planar_command(tmp_path):
    csv_path = tmp_path / "planar.csv"
    json_path = tmp_path / "planar.json"
    code = main([
        "planar", "--kind", "met-aff", "--I", "2", "--A", "1", "--B", "0.5",
        "--m", "1", "--n-label", "2", "--qgrid=-6:6:64", "--xgrid", "0.4:9:64",
        "--potential", "harmonic:kappa=1", "--levels", "3",
        "--out-csv", str(csv_path), "--out-json", str(json_path),
    ])
    assert code == 0
    meta = json.loads(json_path.read_text())
    assert meta["discreteness"] == "discrete"
    rows = csv_path.read_text().strip().splitlines()
    assert rows[0] == "sector,operator,level,energy,residual"
    assert len(rows) == 7  # two operators x three levels


def test_planar_dalembert_command(tmp_path):
    code = main([
        "planar", "--kind", "dalembert", "--I", "1", "--A", "1",
        "--m", "1", "--n-label", "1", "--qgrid", "0:8:48,0:8:48",
        "--potential", "harmonic:kappa=1", "--levels", "2",
        "--out-csv", str(tmp_path / "d.csv"),
    ])
    assert code == 0


def test_validate_wavefunction(tmp_path):
    grid = GridSpec(axes=((-2.0, 2.0, 8),) * 3)
    mesh = np.meshgrid(*(grid.nodes(a) for a in range(3)), indexing="ij")
    radial = np.exp(-sum(m**2 for m in mesh))[..., None, None].astype(complex)
    amp = ReducedAmplitude(SectorLabel.spins(0, 0), grid, radial)
    path = tmp_path / "amp.bin"
    write_amplitude(path, amp)
    out = tmp_path / "report.json"
    code = main(["validate-wavefunction", "--amplitude", str(path),
                 "--degeneracy-point", "0.0", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["superselection"]["projectable"] is True
    assert len(report["exchange_violations"]) == 24
    assert max(report["exchange_violations"].values()) <= 1e-10


def test_missing_grid_is_validation_error(capsys):
    code = main(["spectrum", "--kind", "aff-aff", "--n", "2", "--A", "1",
                 "--B", "0.5", "--m", "1", "--n-label", "2"])
    assert code == 1
    assert "missing required option: grid" in capsys.readouterr().err
