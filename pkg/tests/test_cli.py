import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from boolnoise import boolean_fn as bf
from boolnoise.cli import closed_form_check, main
from boolnoise.noise import apply_noise_direct
from boolnoise.norms import binary_entropy


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_majority(capsys):
    code, out, _ = run(capsys, "analyze", "--function", "majority", "--n", "3", "--p", "0.21", "--symmetrized")
    assert code == 0
    report = json.loads(out)
    locs = sorted(c["location"] for c in report["zeros"]["crossings"] + report["zeros"]["far_crossings"])
    assert len(locs) == 4
    assert locs[0] < 0 and abs(locs[1]) < 1e-9 and abs(locs[2] - 1) < 1e-9 and locs[3] > 2
    assert report["sign_change_bound"] == 4
    assert report["expsum"]["sign_pattern"] == "+-+-+"
    assert [v["conjecture_id"] for v in report["verdicts"]] == ["CK_unsym", "CK", "LM", "LM_sym"]
    assert all(v["holds"] for v in report["verdicts"])


def test_analyze_dictatorship(capsys):
    code, out, _ = run(capsys, "analyze", "--function", "dictatorship:2", "--n", "4", "--p", "0.3")
    assert code == 0
    report = json.loads(out)
    assert report["expsum"]["terms"] == []
    assert report["sign_change_bound"] == 0
    assert set(report["curve"]["g"]) == {0.0}
    assert report["mutual_information"] == pytest.approx(1 - binary_entropy(0.3), abs=1e-12)
    assert report["lemma1"]["ok"]


def test_analyze_xor_table(capsys):
    code, out, _ = run(capsys, "analyze", "--truth-table", "0110", "--n", "2", "--p", "0.25")
    assert code == 0
    report = json.loads(out)
    direct = apply_noise_direct(bf.parse_truth_table("0110"), 0.25).values
    assert np.max(np.abs(np.array(report["field"]) - direct)) < 1e-15
    assert report["field"] == [0.375, 0.625, 0.625, 0.375]
    assert report["function"]["balanced"] and not report["function"]["dictatorship"]


def test_analyze_csv(capsys):
    code, out, _ = run(capsys, "analyze", "--function", "majority", "--n", "3", "--p", "0.1",
                       "--alpha-min", "0", "--alpha-max", "2", "--alpha-step", "0.5", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["alpha", "g"]
    assert [r[0] for r in rows[1:]] == ["0", "0.5", "1", "1.5", "2"]
    assert float(rows[3][1]) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("argv", [
    ["analyze", "--function", "majority", "--n", "3", "--p", "0.5"],
    ["analyze", "--function", "majority", "--n", "2", "--p", "0.1"],
    ["analyze", "--function", "bogus", "--n", "3", "--p", "0.1"],
    ["analyze", "--truth-table", "011", "--p", "0.1"],
    ["analyze", "--p", "0.1"],
    ["verify", "--n", "9"],
    ["verify", "--n", "5"],
    ["verify", "--n", "3", "--p-grid", "0.6"],
    ["figure2", "--p-grid", "0"],
])
def test_invalid_input_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err


def test_range_error_exit_1(capsys):
    code, out, err = run(capsys, "analyze", "--function", "majority", "--n", "3", "--p", "0.1",
                         "--alpha-min", "-1000", "--alpha-max", "1", "--alpha-step", "1")
    assert code == 1 and out == "" and "overflow" in err


def test_verify_n3(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--n", "3", "--out", str(out_file))
    assert code == 0 and out == ""
    text = out_file.read_text()
    report = json.loads(text)
    assert report["functions_tested"] == 70 and report["verdicts"]["all_hold"]
    # round trip is byte-identical
    assert json.dumps(report, indent=2, sort_keys=True) + "\n" == text


def test_verify_csv_header_only(capsys):
    code, out, _ = run(capsys, "verify", "--n", "2", "--format", "csv")
    assert code == 0
    assert out == "truth_table_hex,n,p,conjecture_id,witness_alpha,margin\n"


def test_verify_n4(capsys):
    code, out, _ = run(capsys, "verify", "--n", "4")
    assert code == 0
    assert json.loads(out)["functions_tested"] == 12870


def test_closed_form_check():
    for p in (0.017, 0.068, 0.21):
        result = closed_form_check(p)
        assert result["ok"] and result["max_abs_error"] < 1e-12


def test_figure2_stdout(capsys):
    code, out, _ = run(capsys, "figure2")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["p", "alpha", "g_sym"]
    assert len(rows) == 1 + 3 * 401
    assert {r[0] for r in rows[1:]} == {"0.20999999999999999", "0.068000000000000005", "0.017000000000000001"}


def test_figure2_out_dir(capsys, tmp_path):
    code, out, _ = run(capsys, "figure2", "--out", str(tmp_path))
    assert code == 0 and out == ""
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["figure2_p0.017000000000000001.csv", "figure2_p0.068000000000000005.csv",
                     "figure2_p0.20999999999999999.csv", "figure2_sidecar.json"]
    text = (tmp_path / "figure2_sidecar.json").read_text()
    sidecar = json.loads(text)
    assert json.dumps(sidecar, indent=2, sort_keys=True) + "\n" == text
    assert all(c["ok"] for c in sidecar["closed_form"])
    rows = (tmp_path / "figure2_p0.20999999999999999.csv").read_text().splitlines()
    assert rows[0] == "alpha,g_sym" and rows[1].startswith("-1,")
    # sign changes near -1.04, at 0 and at 1; the fourth lies beyond the plotted range
    values = {float(a): float(v) for a, v in (r.split(",") for r in rows[1:])}
    assert values[-1.0] < 0 and values[-0.5] < 0
    assert values[0.5] > 0
    assert values[1.5] < 0 and values[3.0] < 0


def test_figure2_json(capsys):
    code, out, _ = run(capsys, "figure2", "--p-grid", "0.2", "--alpha-step", "0.5", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["alpha"] == [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    assert list(data["curves"]) == ["0.20000000000000001"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "boolnoise", "analyze", "--function", "majority", "--n", "3",
                           "--p", "0.2", "--format", "csv", "--alpha-min", "1", "--alpha-max", "2"],
                          capture_output=True, text=True, env={"LC_ALL": "de_DE.UTF-8", "PATH": "/usr/bin"})
    assert proc.returncode == 0, proc.stderr
    alpha, value = proc.stdout.splitlines()[1].split(",")
    assert alpha == "1" and abs(float(value)) < 1e-12
