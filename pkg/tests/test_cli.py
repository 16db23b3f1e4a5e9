import csv
import math
import subprocess
import sys

import pytest

from fourphoton import cli
from fourphoton.optimize import EfficiencySurface


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    report = {}
    for line in out.splitlines():
        k, v = line.split(" = ", 1)
        report[k] = v
    return code, report, err


def test_probability_paper_point(capsys):
    code, rep, _ = run(["probability", "--rho", "0.1", "--v", "0.9", "--eta", "0.75", "--a", "104", "--b", "181"], capsys)
    assert code == 0
    c, s = math.cos(math.radians(104)), math.sin(math.radians(104))
    cb, sb = math.cos(math.radians(181)), math.sin(math.radians(181))
    rho = 0.1
    # direct substitution with s = 1 / (1 + rho^2)
    red = c * c * sb * sb - 2 * 0.9 * rho * s * c * sb * cb + rho * rho * s * s * cb * cb
    assert float(rep["out.bell_pair[gated]"]) == pytest.approx(0.75**2 * red / (1 + rho * rho), rel=1e-12)


def test_probability_zero_angles(capsys):
    code, rep, _ = run(["probability", "--rho", "0.1", "--v", "0.9", "--a", "0", "--b", "0"], capsys)
    assert float(rep["out.bell_pair[gated]"]) == pytest.approx(0.0, abs=1e-15)


def test_probability_p_infinity(capsys):
    code, rep, _ = run(["probability", "--symmetric", "--v", "1", "--a", "30", "--b", "75", "--p-infinity"], capsys)
    assert float(rep["out.p_infinity[polarizer-free]"]) == pytest.approx(0.25, abs=1e-12)


def test_probability_from_visibility_parts(capsys):
    code, rep, _ = run(["probability", "--R", "0.2", "--v-e", "0.9", "--dz", "0", "--L", "1", "--a", "30", "--b", "75"], capsys)
    assert code == 0
    assert float(rep["derived.v"]) == 0.9
    assert float(rep["derived.rho"]) == pytest.approx(0.25)


def test_ch_paper_point(capsys):
    args = ["ch", "--rho", "0.1", "--eta", "0.75", "--v", "0.9", "--a1", "104", "--a2", "89",
            "--b1", "181", "--b2", "161", "--corrected"]
    code, rep, _ = run(args, capsys)
    assert code == 0
    assert rep["out.violated"] == "true"
    assert rep["out.corrected_violated"] == "true"
    assert float(rep["out.B_CH"]) > float(rep["out.corrected_B"]) > 0


def test_ch_optimize(capsys):
    code, rep, _ = run(["ch", "--symmetric", "--v", "1", "--eta", "0.9", "--optimize"], capsys)
    assert code == 0
    assert float(rep["out.eta_min"]) == pytest.approx(0.8284271247, abs=1e-8)


@pytest.mark.parametrize(
    "args",
    [
        ["ch", "--rho", "0.1", "--R", "0.2", "--v", "1", "--eta", "1", "--a1", "0", "--a2", "0", "--b1", "0", "--b2", "0"],
        ["ch", "--v", "1", "--eta", "1", "--a1", "0", "--a2", "0", "--b1", "0", "--b2", "0"],
        ["ch", "--rho", "0.1", "--v", "1", "--v-e", "1", "--dz", "0", "--L", "1", "--eta", "1",
         "--a1", "0", "--a2", "0", "--b1", "0", "--b2", "0"],
        ["ch", "--rho", "0.1", "--v", "1.5", "--eta", "1", "--a1", "0", "--a2", "0", "--b1", "0", "--b2", "0"],
        ["ch", "--rho", "0.1", "--v", "1", "--eta", "1"],
        ["probability", "--rho", "-1", "--v", "1", "--a", "0", "--b", "0"],
        ["surface", "--v", "0.9", "--rho", "0.1", "--R", "0.2"],
        ["surface", "--v", "1:0.5:0.1", "--rho", "0.1"],
        ["montecarlo", "--rho", "0.1", "--v", "1", "--a1", "0", "--a2", "0", "--b1", "0", "--b2", "0", "--seed", "-3"],
    ],
)
def test_validation_exit_code(args, capsys):
    code = cli.main(args)
    err = capsys.readouterr().err
    assert code == cli.EXIT_VALIDATION
    assert "error" in err


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        cli.main(["ch", "--eta", "abc"])
    assert exc.value.code == 2


def test_infeasible_exit_code(capsys):
    code = cli.main(["ch", "--rho", "0.1", "--v", "1", "--eta", "1", "--a1", "0", "--a2", "0", "--b1", "0", "--b2", "0"])
    assert code == cli.EXIT_INFEASIBLE


def test_report_rerun_is_bit_exact(tmp_path, capsys):
    path = tmp_path / "r.txt"
    args = ["ch", "--rho", "0.1", "--eta", "0.75", "--v", "0.9", "--a1", "104", "--a2", "89",
            "--b1", "181", "--b2", "161", "--corrected", "--report", str(path)]
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    assert cli.main(["ch", "--config", str(path)]) == 0
    assert capsys.readouterr().out == first


def test_montecarlo_report_embeds_seed_and_reruns(tmp_path, capsys):
    path = tmp_path / "mc.txt"
    args = ["montecarlo", "--rho", "0.1", "--v", "0.9", "--eta", "0.75", "--a1", "104", "--a2", "89",
            "--b1", "181", "--b2", "161", "--n", "20000", "--seed", "9", "--ch", "--report", str(path)]
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    assert "seed = 9" in first
    assert cli.main(["montecarlo", "--config", str(path)]) == 0
    assert capsys.readouterr().out == first


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("rho = 0.1\nv = 0.9\neta = 0.75\na = 104\nb = 181\n")
    code, rep, _ = run(["probability", "--config", str(cfg), "--R", "0.5", "--eta", "1"], capsys)
    assert code == 0
    assert rep["R"] == "0.5" and rep["rho"] == "None"
    assert rep["eta"] == "1.0"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("colour = red\n")
    assert cli.main(["probability", "--config", str(cfg)]) == cli.EXIT_VALIDATION


def test_surface_csv_shape(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, rep, _ = run(["surface", "--v", "0.7:1.0:0.05", "--rho", "0.05:1.0:0.05", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["v", "rho", "eta_min", "a1", "a2", "b1", "b2", "feasible"]
    assert len(rows) - 1 == 7 * 20
    s = EfficiencySurface.read_csv(out)
    assert len(s.v_axis) == 7 and len(s.rho_axis) == 20
    for r in rows[1:]:
        for x in r[:7]:
            digits = x.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
            assert len(digits) <= 12


def test_surface_from_reflectance_axis(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["surface", "--v", "1.0", "--R", "0.2,0.5", "--out", str(out)], capsys)
    s = EfficiencySurface.read_csv(out)
    assert s.rho_axis == pytest.approx([0.25, 1.0])


def test_surface_undefined_cells_exit_three(tmp_path, capsys):
    code, rep, _ = run(["surface", "--v", "0.0", "--rho", "1.0", "--out", str(tmp_path / "u.csv")], capsys)
    assert code == cli.EXIT_INFEASIBLE
    assert rep["out.undefined_cells"] == "1"


def test_hardy(capsys):
    code, rep, _ = run(["hardy"], capsys)
    assert code == 0
    assert float(rep["out.best_R"]) == pytest.approx(0.32, abs=0.02)
    code, rep, _ = run(["hardy", "--R", "0.32", "--v", "0.9"], capsys)
    assert code == cli.EXIT_INFEASIBLE
    assert rep["out.attainable"] == "false"


def test_oracle_check(capsys):
    code, rep, _ = run(["oracle-check", "--n", "1000", "--seed", "7"], capsys)
    assert code == 0
    assert rep["out.failures"] == "0"


def test_oracle_mismatch_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli.analytic, "settings_coincidence", lambda *a: 1.0)
    assert cli.main(["oracle-check", "--n", "3"]) == cli.EXIT_ORACLE


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fourphoton", "probability", "--symmetric", "--v", "1",
                        "--a", "30", "--b", "75"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "out.bell_pair[gated] = " in r.stdout
