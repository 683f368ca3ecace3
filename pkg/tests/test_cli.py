"""CLI checks: argument parsing, exit codes, spec files, inspect output."""

import numpy as np
import pytest

from fskpnc.cli import (
    _parse_snr_range,
    load_spec_file,
    main,
)
from fskpnc.harness import CSV_HEADER, read_csv


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_snr_range():
    assert _parse_snr_range("5") == [5.0]
    assert _parse_snr_range("0:10:5") == [0.0, 5.0, 10.0]
    assert _parse_snr_range("0:1:0.5") == pytest.approx([0.0, 0.5, 1.0])
    import argparse

    with pytest.raises(argparse.ArgumentTypeError):
        _parse_snr_range("0:10")
    with pytest.raises(argparse.ArgumentTypeError):
        _parse_snr_range("10:0:1")


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--help"])
    assert e.value.code == 0
    capsys.readouterr()


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as e:
        main(["sweep"])  # missing required --out
    assert e.value.code == 2
    capsys.readouterr()


def test_sweep_writes_csv_and_prints_table(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, stdout, _ = run_cli(
        [
            "sweep", "--detector", "genie", "--gains", "1,1",
            "--phase", "0.6283185307", "--snr", "6:8:2",
            "--min-errors", "50", "--max-bits", "100000",
            "--seed", "3", "--out", str(out),
        ],
        capsys,
    )
    assert code == 0
    records = read_csv(str(out))
    assert [r.snr_db for r in records] == [6.0, 8.0]
    assert "snr_db" in stdout and "6.00" in stdout


def test_sweep_deterministic(tmp_path, capsys):
    argv = [
        "sweep", "--detector", "genie", "--snr", "8",
        "--min-errors", "50", "--max-bits", "100000", "--seed", "1",
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(argv + ["--out", str(a)], capsys)[0] == 0
    assert run_cli(argv + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_flagged_sweep_exits_one(tmp_path, capsys):
    out = tmp_path / "flagged.csv"
    code, _, stderr = run_cli(
        [
            "sweep", "--detector", "genie", "--snr", "60",
            "--min-errors", "50", "--max-bits", "50000",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == 1
    assert "max_bits" in stderr
    assert read_csv(str(out))[0].flagged


def test_invalid_spec_exits_one(tmp_path, capsys):
    code, _, stderr = run_cli(
        [
            "sweep", "--detector", "genie", "--snr", "8",
            "--min-errors", "10", "--out", str(tmp_path / "x.csv"),
        ],
        capsys,
    )
    assert code == 1
    assert "error:" in stderr


def test_spec_file(tmp_path, capsys):
    f = tmp_path / "exp.cfg"
    f.write_text(
        "# fixed-gain run\n"
        "detector = genie\n"
        "gains = 1,1\n"
        "phase_rad = 0.6283185307\n"
        "cfo-hz = -2000\n"
        "min_errors = 50\n"
        "max_bits = 100000\n"
        "seed = 5\n"
    )
    kw = load_spec_file(str(f))
    assert kw["detector"] == "genie"
    assert kw["gains"] == (1.0, 1.0)
    assert kw["cfo_hz"] == -2000.0
    out = tmp_path / "from_file.csv"
    code, _, _ = run_cli(
        ["sweep", "--spec-file", str(f), "--snr", "8", "--out", str(out)],
        capsys,
    )
    assert code == 0
    rec = read_csv(str(out))[0]
    assert rec.seed == 5
    assert "cfo=-2000" in rec.scenario


def test_spec_file_unknown_key(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("bogus = 1\n")
    with pytest.raises(ValueError, match="unknown key"):
        load_spec_file(str(f))


def test_spec_file_rand_phase(tmp_path):
    f = tmp_path / "r.cfg"
    f.write_text("detector = mpd\nphase_rad = rand\ngains = 1,2\n")
    kw = load_spec_file(str(f))
    assert kw["phase_rad"] is None


def test_out_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FSKPNC_OUT_DIR", str(tmp_path))
    code, _, _ = run_cli(
        [
            "sweep", "--detector", "genie", "--snr", "8",
            "--min-errors", "50", "--max-bits", "100000",
            "--out", "rel.csv",
        ],
        capsys,
    )
    assert code == 0
    assert (tmp_path / "rel.csv").exists()


def test_inspect_noiseless_is_error_free(capsys):
    code, stdout, _ = run_cli(
        [
            "inspect", "--detector", "bpd", "--snr", "120",
            "--phase", "0.6283185307", "--cfo-hz", "-2000",
            "--seed", "2",
        ],
        capsys,
    )
    assert code == 0
    assert "symbol errors: 0/128" in stdout
    assert "drift_hat" in stdout


def test_inspect_kd_runs(capsys):
    code, stdout, _ = run_cli(
        ["inspect", "--detector", "kd", "--snr", "25"], capsys
    )
    assert code == 0
    assert stdout.count("\n") >= 128
