import io
import json
import math
import subprocess
import sys

import pytest

from blindspot.cli import CSV_HEADER, csv_to_rows, main, rows_to_csv
from blindspot.simulator import SweepRow


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_analytic_asymptotic_no_anchors():
    code, out, _ = run("analytic", "asymptotic", "--lambda", "0", "--lambda0", "0.03")
    assert code == 0 and float(out) == 1.0


def test_analytic_independent_value():
    code, out, _ = run("analytic", "independent", "--lambda", "0.03", "--lambda0", "0.03", "--range", "20")
    assert code == 0
    assert out.strip() == "0.238150607"


def test_analytic_conditional():
    code, out, _ = run("analytic", "conditional", "--lambda", "0.01", "--area", "100")
    assert code == 0 and float(out) == pytest.approx(0.919698603, abs=1e-9)


def test_check_delta_warns_below_threshold():
    code, out, err = run("analytic", "check-delta", "--lambda0", "0.029", "--range", "20", "--delta", "1e-4")
    assert code == 0
    assert "containment criterion not met" in err
    assert "criterion_met no" in out
    code, out, err = run("analytic", "check-delta", "--lambda0", "0.03", "--range", "20", "--delta", "1e-4")
    assert err == "" and "criterion_met yes" in out


def test_asymptotic_warns_when_containment_fails():
    _, _, err = run("analytic", "asymptotic", "--lambda", "0.05", "--lambda0", "0.01")
    assert "containment criterion not met" in err


def test_bad_flags_exit_2():
    assert run("analytic", "asymptotic", "--lambda", "abc")[0] == 2
    assert run("simulate", "--length", "-3")[0] == 2
    assert run("analytic", "asymptotic", "--lambda", "0.01", "--lambda0", "0")[0] == 2
    assert run("design", "--epsilon", "1.0")[0] == 2
    assert run("frobnicate")[0] == 2


def test_simulate_no_anchors():
    code, out, _ = run("simulate", "--lambda", "0", "--lambda0", "0.03", "--range", "20",
                       "--infinite", "--trials", "100", "--seed", "7")
    assert code == 0
    assert out.splitlines()[0] == "value 1.00000000"


def test_simulate_repeatable_and_thread_independent():
    args = ["simulate", "--lambda", "0.05", "--lambda0", "0.03", "--length", "6",
            "--trials", "1500", "--seed", "3"]
    first = run(*args)[1]
    assert run(*args)[1] == first
    assert run(*args, "--threads", "4")[1] == first


def test_simulate_csv_row(tmp_path):
    path = tmp_path / "one.csv"
    code, _, _ = run("simulate", "--lambda", "0.05", "--trials", "200", "--seed", "1", "--out", str(path))
    assert code == 0
    rows = csv_to_rows(path.read_text())
    assert len(rows) == 1 and rows[0].method == "mc" and rows[0].L == math.inf


def test_sweep_fig5_recipe_rows(tmp_path):
    path = tmp_path / "fig5.csv"
    code, _, _ = run("sweep", "--recipe", "fig5", "--trials", "300", "--seed", "1", "--out", str(path))
    assert code == 0
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 31
    manifest = json.loads((tmp_path / "fig5.csv.manifest.json").read_text())
    assert set(manifest) >= {"version", "command", "resolved_config", "started_at", "duration_s", "rows_written"}
    assert manifest["rows_written"] == 30
    assert manifest["resolved_config"]["trials"] == 300


def test_sweep_fig6_recipe_uses_design_lambda(tmp_path):
    code, out, err = run("sweep", "--recipe", "fig6", "--trials", "200", "--area-draws", "5",
                         "--methods", "mc,analytic_asymptotic", "--out", "-")
    assert code == 0
    rows = csv_to_rows(out)
    assert len(rows) == 40
    assert rows[1].value == pytest.approx(0.2, abs=1e-6)
    assert "fixed lambda" in err


def test_sweep_to_stdout_and_roundtrip():
    code, out, _ = run("sweep", "--vary", "lambda", "--values", "0.02,0.05", "--methods",
                       "analytic_asymptotic,mc", "--trials", "200", "--out", "-")
    assert code == 0
    assert rows_to_csv(csv_to_rows(out)) == out
    assert "\r" not in out


def test_sweep_empty_values_exit_2():
    assert run("sweep", "--vary", "lambda", "--values", "")[0] == 2
    assert run("sweep", "--vary", "lambda", "--values", "0.1", "--methods", "bogus")[0] == 2


def test_sweep_unwritable_output_exit_4(tmp_path):
    bad = tmp_path / "missing" / "dir" / "x.csv"
    code, _, err = run("sweep", "--vary", "lambda", "--values", "0.1",
                       "--methods", "analytic_asymptotic", "--out", str(bad))
    assert code == 4 and "I/O failure" in err


def test_csv_roundtrip_byte_identical():
    rows = [
        SweepRow("mc", 0.01, 0.03, math.inf, 20.0, 3, 0.82921, 0.00119004528, 100000, 1),
        SweepRow("analytic_asymptotic", 0.1, 0.03, 12.5, 20.0, 3, 1 / 3),
    ]
    text = rows_to_csv(rows)
    assert rows_to_csv(csv_to_rows(text)) == text


def test_design_prints_round_trip():
    code, out, _ = run("design", "--epsilon", "0.1", "--lambda0", "0.03")
    fields = dict(line.split() for line in out.splitlines())
    assert abs(float(fields["achieved_b_as"]) - 0.1) <= 1e-6
    assert float(fields["roundtrip_error"]) <= 1e-6
    _, out2, _ = run("design", "--epsilon", "0.1", "--lambda0", "0.06")
    lam2 = float(dict(line.split() for line in out2.splitlines())["lambda_star"])
    assert lam2 == pytest.approx(2 * float(fields["lambda_star"]), rel=1e-6)


def test_design_near_one():
    code, out, _ = run("design", "--epsilon", "0.999999", "--lambda0", "0.03")
    fields = dict(line.split() for line in out.splitlines())
    assert float(fields["lambda_star"]) < 1e-3
    assert float(fields["achieved_b_as"]) >= 0.999998


def test_validate_cells(tmp_path):
    path = tmp_path / "areas.csv"
    args = ["validate-cells", "--lambda0", "0.03", "--samples", "400", "--seed", "2", "--out", str(path)]
    code, out, _ = run(*args)
    assert code == 0
    summary = dict(line.split() for line in out.splitlines())
    assert int(summary["n_samples"]) + int(summary["n_discarded"]) == 400
    assert float(summary["target_mean"]) == pytest.approx(133.333333)
    first = path.read_text()
    assert first.startswith("index,area\n")
    run(*args)
    assert path.read_text() == first


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"lambda": 0.0, "lambda0": 0.05}))
    _, out, _ = run("analytic", "asymptotic", "--config", str(conf))
    assert float(out) == 1.0
    _, out, _ = run("analytic", "asymptotic", "--config", str(conf), "--lambda", "0.05")
    assert float(out) == pytest.approx(0.35308699951156, rel=1e-8)


def test_config_file_errors(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"wavelength": 3}))
    assert run("analytic", "asymptotic", "--config", str(conf))[0] == 2
    assert run("analytic", "asymptotic", "--config", str(tmp_path / "absent.json"))[0] == 4


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "blindspot", "analytic", "asymptotic", "--lambda", "0.05", "--lambda0", "0.03"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(0.159137108867911, rel=1e-8)
