import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from baht.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_help_lists_exit_codes(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    assert "exit codes" in capsys.readouterr().out


def test_bad_arguments_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["fidelity", "--points", "many"])
    assert info.value.code == 2


def test_bad_propagator_and_sequence(tmp_path, capsys):
    code, _, err = run(capsys, "timeseries", "--prop", "aht:9", "--out", str(tmp_path))
    assert code == 2 and "aht" in err
    code, _, err = run(capsys, "fidelity", "--seq", "nope", "--out", str(tmp_path))
    assert code == 2 and "unknown sequence" in err


def test_malformed_sequence_file_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: a\nbase_unit_tau_ns: 1\nframes:\n  - {axis: [1, 1, 0], sign: 1, duration_units: 1}\n")
    code, _, err = run(capsys, "check-convergence", "--seq-file", str(bad), "--t-us", "0.1")
    assert code == 2
    diag = json.loads(err.strip().splitlines()[-1])
    assert diag["line"] == 4 and diag["column"] == 12


def test_norms_budget_is_a_numerical_error(tmp_path, capsys):
    code, _, err = run(capsys, "norms", "--orders", "7", "--budget", "1000", "--out", str(tmp_path))
    assert code == 3 and "budget" in err


def test_check_convergence_messages(capsys):
    code, out, _ = run(capsys, "check-convergence", "--delta-hz", "1e6", "--t-us", "0.3")
    assert code == 0 and out.strip() == "guaranteed (0.300 < 0.346)"
    code, out, _ = run(capsys, "check-convergence", "--t-us", "0.34")
    assert code == 0 and out.startswith("guaranteed (0.340 < 0.346)")
    code, out, _ = run(capsys, "check-convergence", "--t-us", "0.35")
    assert code == 0 and out.startswith("not guaranteed (0.350 >= 0.346)")


def test_fidelity_outputs_are_reproducible(tmp_path, capsys):
    args = ["fidelity", "--points", "5", "--svg"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
    a = (tmp_path / "a" / "fidelity.csv").read_bytes()
    assert a == (tmp_path / "b" / "fidelity.csv").read_bytes()
    header, data = read_csv(tmp_path / "a" / "fidelity.csv")
    assert header == ["t_seconds", "m", "fidelity"]
    assert data.shape == (10, 3)
    manifest = json.loads((tmp_path / "a" / "fidelity.manifest.json").read_text())
    assert manifest["command"] == "fidelity"
    assert manifest["parameters"]["sequence"] == "wahuha"
    assert {"fidelity.csv", "fidelity.svg"} <= set(manifest["outputs"])
    assert "timestamp" in manifest and manifest["tool_version"]
    root = ET.parse(tmp_path / "a" / "fidelity.svg").getroot()
    assert root.tag.endswith("svg")


def test_norms_output(tmp_path, capsys):
    assert run(capsys, "norms", "--orders", "1,2,3", "--points", "4", "--out", str(tmp_path))[0] == 0
    header, data = read_csv(tmp_path / "norms.csv")
    assert header == ["t_seconds", "delta_t", "order", "spectral_norm_hz"]
    assert sorted(set(data[:, 2])) == [1, 2, 3]
    second = data[data[:, 2] == 2, 3]
    assert np.all(second < 1e-6 * data[data[:, 2] == 1, 3])  # palindromic: even orders vanish


def test_echo_verify(tmp_path, capsys):
    code, out, _ = run(capsys, "echo-verify", "--count", "3", "--M", "3", "--m-max", "4",
                       "--seed", "11", "--out", str(tmp_path))
    assert code == 0 and "all vanish" in out
    report = json.loads((tmp_path / "echo_verify.json").read_text())
    assert report["seed"] == 11 and report["n"] == 6 and report["failures"] == []
    first = (tmp_path / "echo_verify.json").read_bytes()
    run(capsys, "echo-verify", "--count", "3", "--M", "3", "--m-max", "4", "--seed", "11",
        "--threads", "2", "--out", str(tmp_path))
    assert (tmp_path / "echo_verify.json").read_bytes() == first


def test_timeseries_shows_aht_breakdown(tmp_path, capsys):
    common = ["timeseries", "--tau-ns", "300", "--samples-per-period", "6", "--svg"]
    code, out, _ = run(capsys, *common, "--prop", "aht:1", "--out", str(tmp_path / "aht"))
    assert code == 0 and "Delta" in out
    run(capsys, *common, "--prop", "exact", "--out", str(tmp_path / "exact"))
    _, aht = read_csv(tmp_path / "aht" / "spectrum.csv")
    _, exact = read_csv(tmp_path / "exact" / "spectrum.csv")
    f0 = 1e6 / np.sqrt(3)
    width = aht[1, 0] - aht[0, 0]
    peak = aht[np.argmax(aht[:, 1]), 0]
    assert abs(peak - f0) <= width
    band = np.abs(exact[:, 0] - f0) <= width
    assert exact[band, 1].max() < 0.1 * exact[:, 1].max()
    ET.parse(tmp_path / "aht" / "spectrum.svg")


def test_documented_timeseries_example(tmp_path, capsys):
    code, _, _ = run(capsys, "timeseries", "--seq", "wahuha", "--delta-hz", "1e6", "--tau-ns", "50",
                     "--periods", "256", "--prop", "aht:1", "--out", str(tmp_path))
    assert code == 0
    header, spec = read_csv(tmp_path / "spectrum.csv")
    assert header == ["freq_hz", "power"]
    width = spec[1, 0] - spec[0, 0]
    assert abs(spec[np.argmax(spec[:, 1]), 0] - 1e6 / np.sqrt(3)) <= width


def test_alpha_command(tmp_path, capsys):
    code, out, _ = run(capsys, "alpha", "--t-max-us", "0.2", "--points", "4",
                       "--out", str(tmp_path))
    assert code == 0 and "alpha_aht1 = 0.5773502692" in out
    with open(tmp_path / "alpha.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t_seconds", "alpha", "a_x", "a_y", "a_z", "epsilon_hz", "method"]
    alphas = np.array([float(r[1]) for r in rows[1:]])
    assert len(alphas) == 4 and all(r[-1] == rows[1][-1] for r in rows[1:])
    assert np.all((alphas > 1 / 3 - 1e-6) & (alphas < 1 / np.sqrt(3) + 1e-6))


def test_thread_env_must_be_integer(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BAHT_THREADS", "lots")
    code, _, err = run(capsys, "echo-verify", "--count", "1", "--M", "1", "--m-max", "1",
                       "--out", str(tmp_path))
    assert code == 2 and "BAHT_THREADS" in err
