import csv
import json

import numpy as np
import pytest

from prefsynth.cli import build_parser, main


def run_cli(args):
    return main(args)


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_parser_round_trip():
    args = build_parser().parse_args(
        ["synth-exp", "--dim", "3", "--method", "random_discrete", "--burn-in", "50"]
    )
    assert args.command == "synth-exp"
    assert args.dim == 3
    assert args.method == "random_discrete"
    assert args.burn_in == 50


def test_synth_exp_writes_csv(tmp_path):
    out = tmp_path / "results.csv"
    code = run_cli(
        [
            "synth-exp",
            "--dim", "2", "--n-items", "12", "--queries", "2", "--trials", "1",
            "--method", "random_discrete",
            "--chains", "2", "--burn-in", "50", "--samples", "50",
            "--out", str(out),
        ]
    )
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
        "trial", "query_index", "method", "mse", "kendall_tau",
        "selection_seconds", "mi_bits", "posterior_trace",
    ]
    assert len(rows) == 4  # header + prior row + 2 queries
    assert rows[1][1] == "0"


def test_config_file_fills_unset_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"queries": 1, "n_items": 10, "dim": 2,
                               "method": "random_discrete", "trials": 1,
                               "chains": 2, "burn_in": 50, "samples": 50}))
    out = tmp_path / "a.csv"
    code = run_cli(["synth-exp", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        assert len(list(csv.reader(fh))) == 3  # header + rows for 1 query


def test_explicit_flag_overrides_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"queries": 5, "n_items": 10, "dim": 2,
                               "method": "random_discrete", "trials": 1,
                               "chains": 2, "burn_in": 50, "samples": 50}))
    out = tmp_path / "b.csv"
    code = run_cli(
        ["synth-exp", "--config", str(cfg), "--queries", "1", "--out", str(out)]
    )
    assert code == 0
    with open(out, newline="") as fh:
        assert len(list(csv.reader(fh))) == 3


def test_unknown_config_key_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"frobnicate": 1}))
    assert run_cli(["synth-exp", "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_malformed_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("not json")
    assert run_cli(["synth-exp", "--config", str(cfg)]) == 2
    cfg.write_text("[1, 2]")
    assert run_cli(["synth-exp", "--config", str(cfg)]) == 2


def test_constrained_exp_smoke(tmp_path):
    emb = tmp_path / "items.csv"
    rng = np.random.default_rng(0)
    with open(emb, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in rng.uniform(-2, 2, size=(10, 2)):
            writer.writerow(row)
    out = tmp_path / "c.csv"
    code = run_cli(
        [
            "constrained-exp", "--embeddings", str(emb),
            "--queries", "1", "--trials", "1", "--method", "random_discrete",
            "--chains", "2", "--burn-in", "50", "--samples", "50",
            "--out", str(out),
        ]
    )
    assert code == 0
    assert out.exists()


def test_constrained_exp_missing_embeddings(tmp_path, capsys):
    code = run_cli(
        ["constrained-exp", "--embeddings", str(tmp_path / "nope.csv")]
    )
    assert code == 2


def test_gain_tune_writes_csv(tmp_path):
    out = tmp_path / "gains.csv"
    code = run_cli(
        ["gain-tune", "--queries", "1", "--strategy", "random_synthesis",
         "--out", str(out)]
    )
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["query_index", "k_x", "k_y", "k_theta", "mean_error",
                       "posterior_trace"]
    assert len(rows) == 3  # header + query-0 row + 1 query
    assert all(float(rows[1][i]) > 0 for i in (1, 2, 3))


def test_gain_tune_bad_start(tmp_path, capsys):
    assert run_cli(["gain-tune", "--start", "sideways"]) == 2
    assert "unknown start" in capsys.readouterr().err


def test_gain_tune_interactive_points_at_serve(capsys):
    assert run_cli(["gain-tune", "--interactive"]) == 2
    assert "serve" in capsys.readouterr().err
