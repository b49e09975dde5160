"""CLI surface: flags, exit codes, sidecar echo, reproducible output."""

import os

import pytest

from nsrlab.cli import build_parser, main, parse_int_list, resolve_workers


@pytest.mark.parametrize(
    "command",
    ["compare", "floats", "piecewise", "redundancy", "recurrent", "sssp", "selftest"],
)
def test_help_exits_zero(command, capsys):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "--" in out or command == "selftest"


def test_defaults_listed_in_help(capsys):
    with pytest.raises(SystemExit):
        main(["compare", "--help"])
    out = capsys.readouterr().out
    for fragment in ("50000", "--lambda", "--redundancy", "--seeds", "--workers"):
        assert fragment in out


def test_unknown_op_usage_error(tmp_path):
    out = tmp_path / "x.csv"
    with pytest.raises(SystemExit) as exc:
        main(["compare", "--op", "bogus", "--out", str(out)])
    assert exc.value.code == 2
    assert not out.exists()


def test_missing_out_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["compare", "--op", "gt"])
    assert exc.value.code == 2


def test_parse_int_list():
    assert parse_int_list("0..3") == [0, 1, 2, 3]
    assert parse_int_list("2,5,9") == [2, 5, 9]
    assert parse_int_list("7") == [7]


def test_workers_env_override(monkeypatch):
    monkeypatch.delenv("NSRLAB_WORKERS", raising=False)
    assert resolve_workers(3) == 3
    monkeypatch.setenv("NSRLAB_WORKERS", "5")
    assert resolve_workers(3) == 5


def test_compare_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "gt.csv"
    code = main([
        "compare", "--op", "gt", "--models", "nsr", "--seeds", "0",
        "--epochs", "40", "--magnitudes", "2,3", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 1 + 3  # header + train + two magnitudes
    sidecar = tmp_path / "gt.csv.config.txt"
    assert sidecar.exists()
    config = sidecar.read_text()
    assert "op=gt" in config and "epochs=40" in config


def test_repeat_invocations_byte_identical(tmp_path):
    args = [
        "compare", "--op", "eq", "--models", "both", "--seeds", "0..1",
        "--epochs", "30", "--magnitudes", "2",
    ]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_recurrent_subcommand_smoke(tmp_path):
    out = tmp_path / "min.csv"
    code = main([
        "recurrent", "--kind", "min", "--models", "nsr", "--seeds", "0",
        "--epochs", "20", "--lengths", "5", "--magnitudes", "1", "--out", str(out),
    ])
    assert code == 0
    assert len(out.read_text().strip().split("\n")) == 1 + 2


def test_sssp_subcommand_smoke(tmp_path):
    out = tmp_path / "sssp.csv"
    code = main([
        "sssp", "--seeds", "0", "--epochs", "10", "--graphs", "3", "--nodes", "5",
        "--test-graphs", "2", "--weight-scales", "0", "--node-scales", "0", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 1 + 2  # weights scale 0 + nodes scale 0
    assert "normalized_mae" in lines[1]
