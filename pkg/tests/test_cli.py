import csv

import pytest

from rbnedit import cli
from rbnedit.cli import AGGREGATE_HEADER, SERIES_HEADER, SUMMARY_HEADER
from tests.test_stats import A, B

MINIMAL = "mode = stationary\nB = 2\nK = 0\nlandscapes = 1\nruns_per_landscape = 1\ngenerations = 10\nR = 20\n"


def write(path, text):
    path.write_text(text)
    return path


def read_bytes(d):
    return {n: (d / n).read_bytes() for n in ("summary.csv", "series.csv", "aggregate.csv")}


def test_minimal_run(tmp_path):
    cfg = write(tmp_path / "m.cfg", MINIMAL)
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    files = read_bytes(tmp_path / "out")
    lines = files["summary.csv"].decode().split("\n")
    assert lines[0] == SUMMARY_HEADER and len([ln for ln in lines[1:] if ln]) == 1
    assert files["series.csv"].decode().startswith(SERIES_HEADER + "\n")
    assert files["aggregate.csv"].decode().startswith(AGGREGATE_HEADER + "\n")
    assert all(b"\r" not in v and b'"' not in v for v in files.values())
    row = lines[1].split(",")
    assert row[:5] == ["stationary", "2", "0", "0", "0"]
    assert len(row[8].split(".")[1]) == 9 and len(row[9].split(".")[1]) == 6


def test_rerun_byte_identical_and_seed_override(tmp_path, monkeypatch):
    cfg = write(tmp_path / "m.cfg", MINIMAL)
    for name in ("a", "b"):
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / name)]) == 0
    assert read_bytes(tmp_path / "a") == read_bytes(tmp_path / "b")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "c"), "--seed", "77"]) == 0
    assert read_bytes(tmp_path / "c")["summary.csv"] != read_bytes(tmp_path / "a")["summary.csv"]
    monkeypatch.setenv(cli.SEED_ENV, "77")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "d")]) == 0
    assert read_bytes(tmp_path / "d") == read_bytes(tmp_path / "c")
    # command line beats the environment
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "e"), "--seed", "0"]) == 0
    assert read_bytes(tmp_path / "e") == read_bytes(tmp_path / "a")


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = write(tmp_path / "bad.cfg", "mode = stationary\nbogus = 1\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert f"{cfg}:2:1" in capsys.readouterr().err


def test_bad_seed_env_exit_2(tmp_path, monkeypatch):
    cfg = write(tmp_path / "m.cfg", MINIMAL)
    monkeypatch.setenv(cli.SEED_ENV, "-3")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_invariant_violation_exit_3(tmp_path, monkeypatch, capsys):
    from rbnedit import experiments
    from rbnedit.network import GenomeInvariantError

    def broken(spec, i, j):
        raise GenomeInvariantError("reconnect list too short")
    monkeypatch.setattr(experiments, "run_cell", broken)
    cfg = write(tmp_path / "m.cfg", MINIMAL)
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "stationary/B=2/K=0/C=0/landscape=0/run=0" in capsys.readouterr().err


def test_figure_incomplete_exit_4(tmp_path, capsys):
    cfg = write(tmp_path / "m.cfg", MINIMAL)
    cli.main(["run", str(cfg), "--out", str(tmp_path / "r")])
    assert cli.main(["figure", "fig4", "--results", str(tmp_path / "r"), "--out", str(tmp_path / "f4")]) == 4
    err = capsys.readouterr().err
    assert "stationary/B=5/K=5" in err and "stationary/B=2/K=0\n" not in err


def test_figure_complete_grid(tmp_path):
    cfg = write(tmp_path / "g.cfg", "mode = stationary\nB = 1,2,3,4,5\nK = 0,1,2,3,4,5\n"
                "landscapes = 1\nruns_per_landscape = 1\ngenerations = 2\ncycles = 5\nR = 12\nN = 6\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "r")]) == 0
    out = tmp_path / "fig" / "fig4"
    assert cli.main(["figure", "fig4", "--results", str(tmp_path / "r"), "--out", str(out)]) == 0
    rows = list(csv.reader(open(out.with_suffix(".csv"))))
    assert len(rows) == 31
    svg = out.with_suffix(".svg").read_bytes()
    assert svg.startswith(b"<svg") or svg.startswith(b"<?xml")
    assert cli.main(["figure", "fig4", "--results", str(tmp_path / "r"), "--out", str(out)]) == 0
    assert out.with_suffix(".svg").read_bytes() == svg


def test_fig8_two_curves(tmp_path):
    cfg = write(tmp_path / "h.cfg", "mode = hetero_coevo\nB = 2\nK = 1\nlandscapes = 1\n"
                "runs_per_landscape = 1\ngenerations = 20\nlog_every = 5\ncycles = 10\nR = 12\nN = 4\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "r")]) == 0
    out = tmp_path / "fig8"
    assert cli.main(["figure", "fig8", "--results", str(tmp_path / "r"), "--out", str(out)]) == 0
    assert len(list(csv.reader(open(out.with_suffix(".csv"))))) == 1 + 20 // 5 + 1
    svg = out.with_suffix(".svg").read_text()
    assert svg.count("<polyline") == 2


def write_column(path, name, values):
    path.write_text(name + "\n" + "".join(f"{v}\n" for v in values))
    return str(path)


def test_ttest_fixed_dataset(tmp_path, capsys):
    a = write_column(tmp_path / "a.csv", "x", A)
    b = write_column(tmp_path / "b.csv", "x", B)
    assert cli.main(["ttest", a, b, "--column", "x"]) == 0
    assert capsys.readouterr().out.strip() == "t=-2.219241 df=24.496223 p=0.035972"
    assert cli.main(["ttest", b, a, "--column", "x"]) == 0
    assert capsys.readouterr().out.strip() == "t=2.219241 df=24.496223 p=0.035972"
    assert cli.main(["ttest", a, a, "--column", "x"]) == 0
    assert capsys.readouterr().out.strip().endswith("p=1.000000")


def test_ttest_missing_column(tmp_path):
    a = write_column(tmp_path / "a.csv", "x", A)
    assert cli.main(["ttest", a, a, "--column", "y"]) == 2


def test_control_report(tmp_path):
    cfg = write(tmp_path / "c.cfg", MINIMAL.replace("runs_per_landscape = 1", "runs_per_landscape = 3"))
    out = tmp_path / "control.csv"
    assert cli.main(["control", str(cfg), "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 1 and rows[0]["landscapes_match"] == "1"
