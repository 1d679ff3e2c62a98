"""CLI: config parsing/echo round-trips, subcommand outputs, exit codes."""

import json
import os
import subprocess
import sys

import pytest

from lrtransfer.cli import (
    EXIT_CONFIG,
    EXIT_DEGENERATE,
    EXIT_INSUFFICIENT,
    EXIT_OK,
    SCHEMAS,
    ConfigError,
    emit_config,
    main,
    parse_config_file,
    read_dataset_csv,
    resolve_config,
)


@pytest.fixture(autouse=True)
def _outdir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("LRTRANSFER_OUTDIR", str(tmp_path / "runs"))
    monkeypatch.chdir(tmp_path)
    return tmp_path


SMALL_SWEEP = [
    "-o", "params=mup,sp", "-o", "widths=32,64", "-o", "input_dim=12",
    "-o", "data_size=40", "-o", "subsample=10", "-o", "eta_points=5",
    "-o", "seeds=0,1",
]


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("# comment\n[sweep]\nwidths = 32, 64\neta_points = 5\n\n[gendata]\ninput_dim = 7\n")
    sections = parse_config_file(str(cfg))
    assert sections["sweep"]["widths"] == "32, 64"
    assert sections["gendata"]["input_dim"] == "7"


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[nope]\nx = 1\n")
    with pytest.raises(ConfigError, match=r"unknown section"):
        parse_config_file(str(bad))
    bad.write_text("[sweep]\nwdiths = 1\n")
    with pytest.raises(ConfigError, match=r"wdiths"):
        parse_config_file(str(bad))
    bad.write_text("widths = 1\n")
    with pytest.raises(ConfigError, match=r"outside"):
        parse_config_file(str(bad))
    bad.write_text("[sweep]\nno equals sign\n")
    with pytest.raises(ConfigError, match=r"key = value"):
        parse_config_file(str(bad))


def test_resolve_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[sweep]\neta_points = 17\ndepth = 5\n")
    typed = resolve_config("sweep", str(cfg), ["depth=9"])
    assert typed["eta_points"] == 17  # file beats default
    assert typed["depth"] == 9  # override beats file
    assert typed["optimizer"] == "gd"  # default survives


def test_emit_parse_round_trip(tmp_path):
    typed = resolve_config("sweep", None, ["params=mup,ntp", "noise_std=0.25", "widths=8"])
    text = emit_config("sweep", typed)
    cfg = tmp_path / "echo.toml"
    cfg.write_text(text)
    again = resolve_config("sweep", str(cfg), [])
    assert again == typed


def test_sweep_writes_outputs_and_refuses_rerun(capsys):
    assert main(["sweep"] + SMALL_SWEEP) == EXIT_OK
    out = capsys.readouterr().out
    assert "records" in out
    run = os.path.join(os.environ["LRTRANSFER_OUTDIR"], "sweep")
    assert sorted(os.listdir(run)) == ["config.echo.toml", "results.csv", "summary.json"]
    header = open(os.path.join(run, "results.csv")).readline().strip()
    assert header == "param,width,depth,seed,step,eta,train_loss"
    # rerun refused, then allowed with --force and byte-identical
    assert main(["sweep"] + SMALL_SWEEP) == EXIT_CONFIG
    before = open(os.path.join(run, "results.csv")).read()
    assert main(["sweep"] + SMALL_SWEEP + ["--force"]) == EXIT_OK
    assert open(os.path.join(run, "results.csv")).read() == before


def test_sweep_jobs_flag_keeps_outputs_identical():
    assert main(["sweep"] + SMALL_SWEEP + ["-o", "name=j1"]) == EXIT_OK
    assert main(["sweep"] + SMALL_SWEEP + ["-o", "name=j2", "--jobs", "2"]) == EXIT_OK
    root = os.environ["LRTRANSFER_OUTDIR"]
    a = open(os.path.join(root, "j1", "results.csv")).read()
    b = open(os.path.join(root, "j2", "results.csv")).read()
    assert a == b


def test_sweep_rejects_bad_config(capsys):
    assert main(["sweep", "-o", "params=mup,mup"]) == EXIT_CONFIG
    assert "params" in capsys.readouterr().err
    assert main(["sweep", "-o", "nope=1"]) == EXIT_CONFIG
    assert main(["sweep", "-o", "eta_points=soon"]) == EXIT_CONFIG


def test_gendata_then_theory_pipeline():
    assert main(["gendata", "-o", "input_dim=6", "-o", "data_size=15"]) == EXIT_OK
    root = os.environ["LRTRANSFER_OUTDIR"]
    csv_path = os.path.join(root, "gendata", "dataset.csv")
    data = read_dataset_csv(csv_path)
    assert data.m == 15 and data.d == 6
    assert main(["theory", "-o", f"dataset={csv_path}", "-o", "t_list=1,3",
                 "-o", "probes=0,2"]) == EXIT_OK
    rep = json.load(open(os.path.join(root, "theory", "theory_report.json")))
    assert rep["m"] == 15 and rep["d"] == 6
    assert len(rep["phi1"]) == 2


def test_theory_degenerate_dataset_exit(tmp_path, capsys):
    bad = tmp_path / "degen.csv"
    bad.write_text("x0,x1,y\n1.0,2.0,1.0\n1.0,2.0,-1.0\n")
    assert main(["theory", "-o", f"dataset={bad}"]) == EXIT_DEGENERATE
    assert "degenerate" in capsys.readouterr().err


def test_theory_probe_out_of_range(tmp_path):
    ds = tmp_path / "d.csv"
    ds.write_text("x0,y\n1.0,1.0\n-1.0,2.0\n")
    assert main(["theory", "-o", f"dataset={ds}", "-o", "probes=5"]) == EXIT_CONFIG


def test_poly_dumps_coefficients():
    args = ["poly", "-o", "width=16", "-o", "input_dim=8", "-o", "data_size=20",
            "-o", "subsample=5"]
    assert main(args) == EXIT_OK
    root = os.environ["LRTRANSFER_OUTDIR"]
    d = json.load(open(os.path.join(root, "poly", "poly.json")))
    assert d["output_poly"]["degree"] == 3
    assert len(d["output_poly"]["coefficients"]) == 4
    assert d["loss_poly"]["degree"] == 6
    # same seeded instance dumps identical bytes
    before = open(os.path.join(root, "poly", "poly.json")).read()
    assert main(args + ["--force"]) == EXIT_OK
    assert open(os.path.join(root, "poly", "poly.json")).read() == before


def test_poly_rejects_oversized_exact_mode():
    assert main(["poly", "-o", "width=512", "-o", "t=6"]) == EXIT_CONFIG


def test_rmt_judgment_gate(capsys):
    assert main(["rmt", "--n", "64", "--trials", "2", "--seed", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "no pass/fail judgment" in out and "stderr" in out
    assert main(["rmt", "--n", "8", "--trials", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "stderr" not in out
    assert main(["rmt", "--trials", "0"]) == EXIT_CONFIG


def test_ratefit_updates_summary_and_exit_codes(tmp_path, capsys):
    # too few widths -> exit 4
    assert main(["sweep"] + SMALL_SWEEP + ["-o", "name=rf"]) == EXIT_OK
    root = os.environ["LRTRANSFER_OUTDIR"]
    summary = os.path.join(root, "rf", "summary.json")
    assert main(["ratefit", "--summary", summary]) == EXIT_INSUFFICIENT
    # three widths -> fits and appends the block; an even point count keeps
    # eta* off the grid for any symmetric window, so no width can produce an
    # exactly-zero deviation that the fit would then exclude
    assert main(["sweep"] + SMALL_SWEEP + ["-o", "name=rf3", "-o", "widths=16,32,64",
                "-o", "eta_points=6"]) == EXIT_OK
    summary3 = os.path.join(root, "rf3", "summary.json")
    assert main(["ratefit", "--summary", summary3]) == EXIT_OK
    d = json.load(open(summary3))
    assert set(d["ratefit"]) == {"slope", "intercept", "widths"}
    assert main(["ratefit", "--summary", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_echo_config_reruns_to_same_bytes(tmp_path):
    assert main(["sweep"] + SMALL_SWEEP + ["-o", "name=echo1"]) == EXIT_OK
    root = os.environ["LRTRANSFER_OUTDIR"]
    echo = os.path.join(root, "echo1", "config.echo.toml")
    before = open(os.path.join(root, "echo1", "results.csv")).read()
    assert main(["sweep", "-c", echo, "-o", "name=echo2"]) == EXIT_OK
    after = open(os.path.join(root, "echo2", "results.csv")).read()
    assert before == after


def test_module_entry_point_runs():
    out = subprocess.run([sys.executable, "-m", "lrtransfer.cli", "rmt",
                          "--n", "8", "--trials", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "mean=" in out.stdout
