from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from nhpartner import cli

NH = ["--t1", "1.5", "--t2", "1", "--t3", "0.2", "--gamma", "1.3333333333333333"]


def run(args):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_spectrum_envelope():
    code, out, _ = run(["spectrum", "--t1", "1", "--t2", "1", "--cells", "2"])
    assert code == 0
    doc = json.loads(out)
    assert doc["tool"] == "nhpartner" and doc["command"] == "spectrum"
    assert doc["config"]["cells"] == 2 and doc["warnings"] == []
    ev = [complex(z["re"], z["im"]) for z in doc["payload"]["obc"]["eigenvalues"]]
    phi = (1 + 5 ** 0.5) / 2
    assert np.allclose(ev, [-phi, -1 / phi, 1 / phi, phi])


def test_spectrum_both_warns_about_skin():
    code, out, err = run(["spectrum", *NH, "--cells", "40", "--bc", "both"])
    assert code == 0
    assert "skin effect" in err
    assert json.loads(out)["warnings"]


def test_spectrum_csv_round_trip():
    code, out, _ = run(["spectrum", *NH, "--cells", "10", "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 20 and set(rows[0]) == {"bc", "index", "E_re", "E_im"}
    code2, out2, _ = run(["spectrum", *NH, "--cells", "10"])
    ev = json.loads(out2)["payload"]["obc"]["eigenvalues"]
    assert [float(r["E_re"]) for r in rows] == [z["re"] for z in ev]
    assert [float(r["E_im"]) for r in rows] == [z["im"] for z in ev]


def test_csv_uses_17_digits():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert float(cli.fmt(np.pi)) == np.pi


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("t1: 0.5\nt2: 1.0\ngamma: 0.0\ngrid: 512\n")
    code, out, _ = run(["winding", "--config", str(cfg), "--t1", "2.0"])
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["t1"] == 2.0 and doc["config"]["grid"] == 512
    assert doc["payload"]["nu_q"] == 0


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("t1: 1\nbogus: 3\n")
    code, _, err = run(["winding", "--config", str(cfg), "--t2", "1"])
    assert code == 2 and "bogus" in err


def test_broken_regime_exit_code():
    code, _, err = run(["winding", "--t1", "0.5", "--t2", "1", "--gamma", "2"])
    assert code == 2 and "broken regime" in err


def test_bad_flag_exit_code():
    code, _, _ = run(["spectrum", "--nope", "1"])
    assert code == 2


def test_missing_parameter():
    code, _, err = run(["winding", "--t1", "1"])
    assert code == 2 and "t2" in err


def test_foreign_parameter_rejected():
    code, _, err = run(["spectrum", "--t1", "1", "--t2", "1", "--lam", "0.3"])
    assert code == 2 and "lam" in err


def test_numeric_failure_exit_code():
    # t1 = t2 closes the gap on the contour itself
    code, _, err = run(["winding", "--t1", "1", "--t2", "1"])
    assert code == 3 and "numerical failure" in err


def test_winding_soc():
    code, out, _ = run(["winding", "--model", "soc", "--t", "1", "--tprime", "1.6",
                        "--lam", "0.2", "--lamprime", "0.5", "--grid", "512"])
    assert code == 0
    pay = json.loads(out)["payload"]
    assert {"up", "down", "off_block_residual"} <= set(pay)


def test_transitions_analytic_only():
    code, out, _ = run(["transitions", "--t1", "1", "--t2", "1", "--t3", "0.2", "--gamma",
                        "1.3333333333333333", "--lo", "1.2", "--hi", "2", "--no-numeric"])
    roots = json.loads(out)["payload"]["analytic"]
    assert roots == pytest.approx([1.5660, 1.7050], abs=5e-4)


def test_transitions_need_range():
    code, _, err = run(["transitions", "--t1", "1", "--t2", "1", "--no-numeric"])
    assert code == 2 and "--lo" in err


def test_transitions_impurity_numeric():
    code, out, _ = run(["transitions", "--model", "impurity", "--t", "1", "--tprime", "1",
                        "--phi", "0.2", "--v", "0.5", "--cells", "60", "--lo", "0.6",
                        "--hi", "1.4", "--samples", "17"])
    pay = json.loads(out)["payload"]
    assert code == 0 and pay["analytic"] == {"t": 1.0}
    assert "gap_scan" in pay


def test_sweep_jobs_byte_identical():
    args = ["sweep", *NH, "--axis", "t1", "--lo", "1.2", "--hi", "2.0", "--points", "5",
            "--cells", "40", "--format", "csv"]
    _, serial, _ = run(args)
    _, parallel, _ = run(args + ["--jobs", "2"])
    assert serial == parallel
    assert serial.splitlines()[0] == "t1,gap,zero_modes,nu_q,error"


def test_sweep_output_file(tmp_path):
    target = tmp_path / "sweep.json"
    code, out, _ = run(["sweep", *NH, "--axis", "t1", "--lo", "1.6", "--hi", "1.8",
                        "--points", "3", "--cells", "40", "-o", str(target)])
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert len(doc["payload"]["rows"]) == 3


def test_transform_check_impurity():
    code, out, _ = run(["transform-check", "--model", "impurity", "--t", "0.8", "--tprime", "1",
                        "--phi", "0.2", "--v", "0.5", "--cells", "40", "--transform", "impurity"])
    pay = json.loads(out)["payload"]
    assert code == 0
    assert pay["hermiticity_residual"] < 1e-12 and pay["spectral_invariance"] < 1e-9
    assert pay["diagonal_after"] == [{"re": 0.5, "im": 0.0}]


def test_transform_check_wrong_family():
    code, _, err = run(["transform-check", *NH, "--transform", "s4"])
    assert code == 2 and "soc" in err


def test_localization_profiles(tmp_path):
    prof = tmp_path / "prof.csv"
    code, out, _ = run(["localization", "--t1", "1.5", "--t2", "1", "--gamma",
                        "1.3333333333333333", "--cells", "20", "--states", "0,3",
                        "--profiles", str(prof)])
    pay = json.loads(out)["payload"]
    assert code == 0 and pay["skin_summary"]["edge"] in ("left", "right")
    lines = prof.read_text().splitlines()
    assert lines[0] == "site,state_0,state_3" and len(lines) == 41


def test_localization_bad_state():
    code, _, _ = run(["localization", *NH, "--cells", "5", "--states", "99"])
    assert code == 2


def test_main_entry(monkeypatch, capsys):
    monkeypatch.setattr("sys.argv", ["nhpartner", "winding", "--t1", "2", "--t2", "1"])
    with pytest.raises(SystemExit) as exc:
        cli.main()
    assert exc.value.code == 0
    assert json.loads(capsys.readouterr().out)["payload"]["nu_q"] == 0


def test_config_values_coerced(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("t1: 1\nt2: 1\nzero_tol: 1e-5\npoints: 2\nlo: 0.5\nhi: 0.7\naxis: t1\n")
    code, out, _ = run(["sweep", "--config", str(cfg), "--cells", "40"])
    doc = json.loads(out)
    assert code == 0 and doc["config"]["zero_tol"] == 1e-5
    bad = tmp_path / "bad.yaml"
    bad.write_text("cells: 2.5\n")
    assert run(["spectrum", "--config", str(bad), "--t1", "1", "--t2", "1"])[0] == 2
