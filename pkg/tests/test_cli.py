import json

import numpy as np
import pytest

from cuspwave.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, main


def _read_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)["error"]


def test_invalid_p_exits_config_and_names_field(capsys):
    code = main(["branch", "--p", "0.5"])
    assert code == EXIT_CONFIG
    record = _read_error(capsys)
    assert record["field"] == "p"
    assert "p" in record["message"]


def test_dealiasing_violation_is_config_error(capsys):
    code = main(["branch", "--M", "512", "--N", "1024"])
    assert code == EXIT_CONFIG
    assert _read_error(capsys)["field"] == "N"


def test_bad_eps_schedule_rejected(capsys):
    code = main(["homotopy", "--eps-schedule", "1e-3,1e-2"])
    assert code == EXIT_CONFIG
    assert _read_error(capsys)["field"] == "eps_schedule"


def test_kernel_command_writes_csv(tmp_path):
    code = main(
        ["kernel", "--alpha", "0.5", "--kernel-nodes", "129", "--output-dir", str(tmp_path)]
    )
    assert code == EXIT_OK
    raw = np.loadtxt(tmp_path / "kernel.csv", delimiter=",", skiprows=1)
    x, K, singular, regular = raw.T
    assert raw.shape[1] == 4
    assert np.allclose(K, singular + regular, atol=1e-12)
    # evenness and the blow-up toward x = 0
    assert np.allclose(K, K[::-1], atol=1e-12)
    assert np.argmax(K) == np.argmin(np.abs(x))
    assert np.max(K) > 1.0 > abs(K[0])


def test_kernel_command_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["kernel", "--alpha", "0.7", "--output-dir", str(out)]) == EXIT_OK
    assert (out1 / "kernel.csv").read_bytes() == (out2 / "kernel.csv").read_bytes()


def test_json_config_with_flag_override(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"alpha": 0.5, "M": 16, "N": 64, "kernel_nodes": 65}))
    out = tmp_path / "out"
    code = main(
        ["kernel", "--config", str(config), "--alpha", "0.9", "--output-dir", str(out)]
    )
    assert code == EXIT_OK
    # the flag override wins: alpha = 0.9 decays slower at pi than alpha = 0.5
    raw = np.loadtxt(out / "kernel.csv", delimiter=",", skiprows=1)
    assert raw.shape[0] == 64  # kernel_nodes 65 -> even count after dropping x = 0


def test_unknown_config_field_rejected(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"granularity": 3}))
    assert main(["kernel", "--config", str(config)]) == EXIT_CONFIG
    assert _read_error(capsys)["field"] == "granularity"


def test_missing_config_file_is_io_error(tmp_path):
    assert main(["kernel", "--config", str(tmp_path / "nope.json")]) == EXIT_IO


def test_branch_failure_exits_numerical(tmp_path):
    # a step budget too small to reach the crest
    code = main(
        [
            "branch",
            "--M", "16",
            "--N", "64",
            "--eps", "0.1",
            "--ds-max", "1e-6",
            "--ds", "1e-6",
            "--ds-min", "1e-7",
            "--output-dir", str(tmp_path),
        ]
    )
    assert code == EXIT_NUMERICAL
    assert (tmp_path / "branch_summary.txt").exists()


def test_branch_and_audit_round_trip(tmp_path):
    args = [
        "--alpha", "0.5",
        "--kind", "abs",
        "--p", "2.0",
        "--eps", "0.1",
        "--M", "64",
        "--N", "256",
        "--output-dir", str(tmp_path),
    ]
    assert main(["regularity"] + args) == EXIT_OK
    report_1 = (tmp_path / "regularity_report.txt").read_text()
    assert "alpha_hat:" in report_1

    out2 = tmp_path / "audit"
    code = main(
        ["audit"]
        + args[:-2]
        + ["--output-dir", str(out2), "--input", str(tmp_path / "wave.csv")]
    )
    assert code == EXIT_OK
    report_2 = (out2 / "audit_report.txt").read_text()

    # the audit recomputes every field from the CSV alone; numbers agree to
    # round-off (the decimal round trip can move the last digit), flags exactly
    def fields(text):
        out = {}
        for line in text.strip().splitlines():
            key, _, rest = line.partition(":")
            out[key] = rest.split()
        return out

    f1, f2 = fields(report_1), fields(report_2)
    assert f1.keys() == f2.keys()
    for key in f1:
        for a, b in zip(f1[key], f2[key]):
            try:
                assert float(a) == pytest.approx(float(b), rel=1e-10, abs=1e-12, nan_ok=True)
            except ValueError:
                assert a == b  # True/False flags


def test_audit_row_count_mismatch(tmp_path, capsys):
    bad = tmp_path / "wave.csv"
    bad.write_text("x,phi,mu_minus_phi\n0.0,0.0,1.0\n")
    code = main(["audit", "--input", str(bad), "--output-dir", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert _read_error(capsys)["field"] == "input"
