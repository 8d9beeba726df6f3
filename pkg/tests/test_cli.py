import json
import math

import numpy as np
import pytest

from bubblekit import cli

T_STAR = math.sqrt(math.sqrt(5.0) - 2.0)


@pytest.fixture(scope="module")
def disk_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("domains") / "disk.json"
    path.write_text(json.dumps({"kind": "unit_disk", "radius": 1.0}))
    return str(path)


def test_identities_verify_passes(disk_file, tmp_path, capsys):
    out = tmp_path / "identities.json"
    status = cli.dispatch(["identities", "verify", "--out", str(out)])
    assert status == 0
    payload = json.loads(out.read_text())
    assert payload["n_failed"] == 0
    assert payload["n_records"] >= 40
    assert "config" in payload and "version" in payload
    assert "0 failed" in capsys.readouterr().out


def test_identities_filter(tmp_path):
    out = tmp_path / "sub.json"
    status = cli.dispatch(["identities", "verify", "--filter", "B.6*",
                           "--out", str(out)])
    assert status == 0
    assert json.loads(out.read_text())["n_records"] >= 9


def test_greens_eval_inside(disk_file, tmp_path):
    out = tmp_path / "g.json"
    status = cli.dispatch(["greens", "eval", "--domain", disk_file,
                           "--x=0.3,0.0", "--y=-0.2,0.1",
                           "--out", str(out)])
    assert status == 0
    payload = json.loads(out.read_text())
    assert payload["green"] > 0.0


def test_greens_eval_outside_is_usage_error(disk_file, capsys):
    status = cli.dispatch(["greens", "eval", "--domain", disk_file,
                           "--x=1.5,0.0", "--y=0.0,0.0"])
    assert status == 2
    status = cli.dispatch(["--json-errors", "greens", "eval",
                           "--domain", disk_file,
                           "--x=1.5,0.0", "--y=0.0,0.0"])
    assert status == 2
    err = json.loads(capsys.readouterr().out)
    assert err["status"] == 2
    assert "error" in err


def test_missing_domain_file_is_usage_error(tmp_path):
    status = cli.dispatch(["greens", "eval", "--domain",
                           str(tmp_path / "nope.json"),
                           "--x=0.0,0.0", "--y=0.1,0.1"])
    assert status == 2


def test_kr_find_locates_t_star(disk_file, tmp_path):
    out = tmp_path / "kr.json"
    status = cli.dispatch(["kr", "find", "--domain", disk_file,
                           "--signs", "+,-", "--starts", "32",
                           "--seed", "7", "--out", str(out)])
    assert status == 0
    payload = json.loads(out.read_text())
    pts = np.asarray(payload["reports"][0]["points"], dtype=float)
    assert abs(abs(pts[0, 0]) - T_STAR) < 1e-6


def test_kr_find_deterministic(disk_file, tmp_path):
    out = tmp_path / "kr.json"
    args = ["kr", "find", "--domain", disk_file, "--signs", "+,-",
            "--starts", "24", "--seed", "3", "--out", str(out)]
    assert cli.dispatch(args) == 0
    first = out.read_bytes()
    assert cli.dispatch(args) == 0
    assert out.read_bytes() == first


def test_radial_dconst(tmp_path):
    out = tmp_path / "d.json"
    status = cli.dispatch(["radial", "dconst", "--p", "1.5", "--mu", "1.0",
                           "--out", str(out)])
    assert status == 0
    payload = json.loads(out.read_text())
    assert abs(payload["D1"] - 0.3177661667193430) < 1e-10
    assert abs(payload["D2"] + 41.969706585760754) < 1e-6


def test_ansatz_build_and_residual_roundtrip(disk_file, tmp_path):
    ans_file = tmp_path / "ansatz.json"
    status = cli.dispatch(["ansatz", "build", "--domain", disk_file,
                           "--p", "1.0", "--lambda", "1e-6",
                           "--points", "0,0", "--signs", "+",
                           "--out", str(ans_file)])
    assert status == 0
    payload = json.loads(ans_file.read_text())
    assert payload["p"] == 1.0
    assert "params" in payload

    res_file = tmp_path / "res.json"
    field_file = tmp_path / "field.csv"
    status = cli.dispatch(["ansatz", "residual", "--in", str(ans_file),
                           "--out", str(res_file),
                           "--field-out", str(field_file)])
    assert status == 0
    res = json.loads(res_file.read_text())
    # ||E||_* = 2 lambda for a centered single bubble at p = 1
    assert abs(res["norm"] - 2e-6) < 2e-8
    header = field_file.read_text().splitlines()
    assert header[0].startswith("# config:")
    assert header[1].startswith("# version:")
    assert header[2].split(",")[0] in ("x", "# x")


def test_energy_expand_csv(disk_file, tmp_path):
    ans_file = tmp_path / "ansatz.json"
    cli.dispatch(["ansatz", "build", "--domain", disk_file,
                  "--p", "1.0", "--lambda", "1e-6",
                  "--points", "0,0", "--signs", "+", "--out", str(ans_file)])
    out = tmp_path / "sweep.csv"
    status = cli.dispatch(["energy", "expand", "--ansatz", str(ans_file),
                           "--sweep", "1e-6:1e-8:2", "--out", str(out)])
    assert status == 0
    lines = out.read_text().splitlines()
    cols = next(ln for ln in lines if not ln.startswith("#")).split(",")
    assert {"lambda", "J", "F_closed", "beta_direct",
            "beta_formula", "deviation"} <= set(c.strip() for c in cols)
    assert len([ln for ln in lines if not ln.startswith("#")
                and not ln.startswith("lambda")]) == 2


def test_pde_solve_small_grid(disk_file, tmp_path):
    ans_file = tmp_path / "ansatz.json"
    cli.dispatch(["ansatz", "build", "--domain", disk_file,
                  "--p", "1.0", "--lambda", "0.01",
                  "--points", "0,0", "--signs", "+", "--out", str(ans_file)])
    report_file = tmp_path / "report.json"
    field_file = tmp_path / "u.csv"
    status = cli.dispatch(["pde", "solve", "--seed", str(ans_file),
                           "--nr", "128", "--ntheta", "64",
                           "--out", str(field_file),
                           "--report", str(report_file)])
    assert status == 0
    rep = json.loads(report_file.read_text())
    assert rep["converged"] is True
    assert rep["iterations"] <= 10
    assert rep["nodal_components"] == 1


def test_bad_sweep_is_usage_error(disk_file, tmp_path):
    ans_file = tmp_path / "ansatz.json"
    cli.dispatch(["ansatz", "build", "--domain", disk_file,
                  "--p", "1.0", "--lambda", "1e-6",
                  "--points", "0,0", "--signs", "+", "--out", str(ans_file)])
    assert cli.dispatch(["energy", "expand", "--ansatz", str(ans_file),
                         "--sweep", "nonsense"]) == 2


def test_unknown_command_is_usage_error():
    assert cli.dispatch(["frobnicate"]) == 2
