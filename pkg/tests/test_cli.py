import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from beamrefine import cli

FAST = ["--set", "sweep.n_trials=3"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def report(text):
    return {k.strip(): v.strip() for k, v in (line.split(":", 1) for line in text.splitlines())}


def test_help_runs_as_module():
    proc = subprocess.run([sys.executable, "-m", "beamrefine", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "slepian-dump" in proc.stdout


def test_sweep_rmse_rows(capsys):
    code, out, _ = run(["sweep", "--kind", "rmse", "--set", "sweep.snr_bbf_db=0,10",
                        "--set", "sweep.epsilons_deg=0.5,1,1.5", "--seed", "1"] + FAST, capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["snr_bbf_db", "epsilon_deg", "rmse_angle_deg", "rmse_range_m", "rmse_velocity_mps", "failures"]
    assert len(rows) == 7


def test_sweep_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["sweep", "--kind", "se", "--seed", "5", "--out", str(p),
                         "--set", "sweep.snr_bbf_db=-5,5", "--set", "sweep.epsilons_deg=1"] + FAST) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_high_snr_gap(capsys):
    code, out, _ = run(["sweep", "--kind", "se", "--set", "sweep.snr_bbf_db=10", "--set", "sweep.epsilons_deg=1.5",
                        "--set", "sweep.angle_span_deg=0", "--set", "sweep.n_trials=20"], capsys)
    assert code == 0
    row = list(csv.DictReader(io.StringIO(out)))[0]
    assert float(row["se_refined"]) - float(row["se_unrefined"]) == pytest.approx(4.9, abs=0.3)


def test_slepian_dump(capsys):
    code, out, _ = run(["slepian-dump"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["angle_deg", "psi1_db", "psi2_db", "psi3_db", "psi4_db"]
    data = np.array(rows[1:], dtype=float)
    angles, psi1 = data[:, 0], data[:, 1]
    assert abs(angles[np.argmax(psi1)]) <= np.degrees(np.arcsin(4 / 64))
    assert np.all(psi1[np.abs(angles) >= 30] <= psi1.max() - 20)


def test_refine_noiseless(capsys):
    code, out, _ = run(["refine", "--set", "trial.noiseless=true", "--seed", "3"], capsys)
    assert code == 0
    r = report(out)
    assert abs(float(r["angle error [deg]"])) <= 0.01
    assert abs(float(r["range [m]"].split()[0]) - 40) <= 0.05


def test_refine_perfect_coarse(capsys):
    code, out, _ = run(["refine", "--set", "trial.noiseless=true", "--set", "trial.epsilon_deg=0"], capsys)
    assert code == 0
    r = report(out)
    assert r["SE refined [b/s/Hz]"] == r["SE unrefined [b/s/Hz]"]


def test_refine_warns_about_cyclic_prefix(capsys):
    _, out, _ = run(["refine"], capsys)
    assert "warning" in out and "cyclic prefix" in out


def test_refine_spectrum_out(tmp_path, capsys):
    path = tmp_path / "spec.csv"
    code, _, _ = run(["refine", "--spectrum-out", str(path), "--set", "sweep.music_points=41"], capsys)
    assert code == 0
    assert len(path.read_text().splitlines()) == 42


def test_refine_estimation_failure(capsys):
    code, out, _ = run(["refine", "--set", "trial.noiseless=true", "--set", "trial.epsilon_deg=20"], capsys)
    assert code == 2
    assert "estimation failed" in out


def test_snapshots(tmp_path, capsys):
    path = tmp_path / "g.bin"
    assert run(["snapshots", "--out", str(path), "--set", "ofdm.n_subcarriers=8"], capsys)[0] == 0
    assert path.stat().st_size == 16 * 8 * 4 * 16
    code, _, err = run(["snapshots"], capsys)
    assert code == 1 and "--out" in err


def test_missing_config(tmp_path, capsys):
    code, _, err = run(["refine", "-c", str(tmp_path / "nope.cfg")], capsys)
    assert code == 1
    assert "nope.cfg" in err


def test_bad_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["refine", "--bogus"])
    code = exc.value.code
    assert code == 1


def test_sweep_needs_kind():
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep"])
    assert exc.value.code == 1


@pytest.mark.parametrize("text, line, fragment", [
    ("ofdm.n_symbols = 16\n\narray.n_rf = 70\n", 3, "n_rf"),
    ("# comment\nuser.range = -3\n", 2, "range"),
    ("array.n_antennas = 64\nbogus.key = 1\n", 2, "unknown key"),
    ("sweep.n_trials = 10\nsweep.n_trials = 20\n", 2, "duplicate"),
    ("ofdm.n_symbols = sixteen\n", 1, "bad value"),
    ("just some words\n", 1, "key = value"),
])
def test_config_errors_are_line_anchored(tmp_path, capsys, text, line, fragment):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    code, _, err = run(["refine", "-c", str(path)], capsys)
    assert code == 1
    assert f"run.cfg:{line}:" in err
    assert fragment in err


def test_unknown_override(capsys):
    code, _, err = run(["refine", "--set", "nope=1"], capsys)
    assert code == 1 and "unknown key" in err
