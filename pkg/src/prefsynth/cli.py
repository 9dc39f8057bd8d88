"""Command-line entry points.

Subcommands: synth-exp, constrained-exp, gain-tune, serve.  Every flag can
also be supplied via --config FILE (JSON, same key names with underscores);
explicit flags override the file.  Exit codes: 0 success, 2 config error,
1 runtime failure.
"""

import argparse
import csv
import json
import sys

from prefsynth.errors import ConfigError, PrefsynthError


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _merged(args, parser):
    """Config-file values fill in flags the user did not pass explicitly."""
    values = vars(args).copy()
    if values.get("config"):
        file_values = _load_config(values["config"])
        subparsers = next(
            a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
        )
        subparser = subparsers.choices[values["command"]]
        defaults = {a.dest: a.default for a in subparser._actions}
        for key, val in file_values.items():
            if key not in defaults:
                raise ConfigError(f"unknown config key {key!r}")
            if values.get(key) == defaults.get(key):
                values[key] = val
    return values


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--sigma0", type=float, default=0.1)
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="info_synth")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=500)
    p.add_argument("--samples", type=int, default=250)
    p.add_argument("--target-accept", dest="target_accept", type=float, default=0.3)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--gamma", type=float, default=0.2)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--zeta", type=float, default=0.1)
    p.add_argument("--pair-cap", dest="pair_cap", type=int, default=200_000)
    p.add_argument("--oracle", choices=["model", "deterministic"], default="model")


def build_parser():
    parser = argparse.ArgumentParser(prog="prefsynth")
    sub = parser.add_subparsers(dest="command", required=True)

    pse = sub.add_parser("synth-exp", help="synthetic preference-learning experiment")
    pse.add_argument("--dim", type=int, default=4)
    pse.add_argument("--n-items", dest="n_items", type=int, default=100)
    pse.add_argument("--continuous", action="store_true",
                     help="continuous setting (synthesis methods query off-pool points)")
    _add_common(pse)

    pce = sub.add_parser("constrained-exp", help="experiment on precomputed embeddings")
    pce.add_argument("--embeddings", required=True)
    _add_common(pce)

    pgt = sub.add_parser("gain-tune", help="preference-based controller gain tuning")
    pgt.add_argument("--trajectory", default="1", help="1|2|3|4|all")
    pgt.add_argument("--start", default="perfect", help="perfect|lateral|heading|all")
    pgt.add_argument("--strategy", default="info_synth")
    pgt.add_argument("--queries", type=int, default=30)
    pgt.add_argument("--kappa", type=float, default=5.0)
    pgt.add_argument("--sigma0", type=float, default=0.3)
    pgt.add_argument("--seed", type=int, default=0)
    pgt.add_argument("--out", default="gain_tune.csv")
    pgt.add_argument("--interactive", action="store_true",
                     help="defer oracle calls to the session service")
    pgt.add_argument("--config", help="JSON config file; flags override it")

    psv = sub.add_parser("serve", help="run the HTTP session service")
    psv.add_argument("--port", type=int, default=8080)
    psv.add_argument("--data-dir", dest="data_dir", default=None)
    psv.add_argument("--config", help="JSON config file; flags override it")

    return parser


def _strategy_from(values, continuous_bounds=None):
    from prefsynth.strategies import StrategyConfig

    return StrategyConfig(
        method=values["method"],
        alpha=values["alpha"],
        beta=values["beta"],
        gamma=values["gamma"],
        k=values["k"],
        zeta=values["zeta"],
        pair_cap=values["pair_cap"],
        continuous_bounds=continuous_bounds,
    )


def _sampler_from(values):
    from prefsynth.posterior import SamplerConfig

    return SamplerConfig(
        chains=values["chains"],
        burn_in=values["burn_in"],
        samples=values["samples"],
        target_accept=values["target_accept"],
        seed=values["seed"],
    )


def cmd_synth_exp(values):
    from prefsynth.experiments import (
        ExperimentConfig,
        SyntheticSpec,
        run_active_loop,
        write_records,
    )

    spec = SyntheticSpec(
        d=values["dim"],
        n_items=values["n_items"],
        trials=values["trials"],
        queries=values["queries"],
        sigma0=values["sigma0"],
        seed=values["seed"],
    )
    cfg = ExperimentConfig(
        spec=spec,
        strategy=_strategy_from(values),
        sampler=_sampler_from(values),
        oracle_mode=values["oracle"],
    )
    write_records(values["out"], run_active_loop(cfg))
    print(f"wrote {values['out']}")


def cmd_constrained_exp(values):
    from prefsynth.experiments import (
        ExperimentConfig,
        SyntheticSpec,
        load_embeddings,
        run_active_loop,
        write_records,
    )

    pool = load_embeddings(values["embeddings"])
    spec = SyntheticSpec(
        d=pool.dim,
        n_items=pool.n_items,
        trials=values["trials"],
        queries=values["queries"],
        sigma0=values["sigma0"],
        seed=values["seed"],
    )
    cfg = ExperimentConfig(
        spec=spec,
        strategy=_strategy_from(values),
        sampler=_sampler_from(values),
        oracle_mode=values["oracle"],
        pool=pool,
    )
    write_records(values["out"], run_active_loop(cfg))
    print(f"wrote {values['out']}")


def cmd_gain_tune(values):
    from prefsynth.robosim import BezierPath, Scenario, TuningConfig, tune_gains
    from prefsynth.strategies import StrategyConfig

    if values["interactive"]:
        raise ConfigError(
            "--interactive runs through the session service: start `prefsynth serve` "
            "and create a gain_tuning session (see README)"
        )
    start_map = {"perfect": ["perfect"], "lateral": ["lateral_error"],
                 "heading": ["heading_error"],
                 "all": ["perfect", "lateral_error", "heading_error"]}
    if values["start"] not in start_map:
        raise ConfigError(f"unknown start {values['start']!r}")
    trajs = [1, 2, 3, 4] if values["trajectory"] == "all" else [int(values["trajectory"])]
    scenarios = tuple(
        Scenario(path=BezierPath.builtin(t), start=s)
        for t in trajs
        for s in start_map[values["start"]]
    )
    cfg = TuningConfig(
        scenarios=scenarios,
        strategy=StrategyConfig(method=values["strategy"]),
        queries=values["queries"],
        kappa=values["kappa"],
        sigma0=values["sigma0"],
        seed=values["seed"],
    )
    with open(values["out"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_index", "k_x", "k_y", "k_theta", "mean_error", "posterior_trace"])
        for rec in tune_gains(cfg):
            writer.writerow(
                [rec.query_index, rec.gains.k_x, rec.gains.k_y, rec.gains.k_theta,
                 rec.mean_error, rec.posterior_trace]
            )
    print(f"wrote {values['out']}")


def cmd_serve(values):
    from prefsynth.service import main as serve_main

    serve_main(port=values["port"], data_dir=values["data_dir"])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        values = _merged(args, parser)
        command = values["command"]
        if command == "synth-exp":
            cmd_synth_exp(values)
        elif command == "constrained-exp":
            cmd_constrained_exp(values)
        elif command == "gain-tune":
            cmd_gain_tune(values)
        elif command == "serve":
            cmd_serve(values)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PrefsynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
