"""Synthetic datasets, embedding ingestion, metrics, and the active loop.

The loop alternates posterior sampling, query selection, and oracle responses;
metrics for each query are computed from the post-update posterior.  Results
are streamed as RunRecord rows and can be written to CSV with the header
trial,query_index,method,mse,kendall_tau,selection_seconds,mi_bits,posterior_trace
"""

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from prefsynth.errors import (
    ConfigError,
    DegeneratePosteriorError,
    DimensionMismatchError,
)
from prefsynth.posterior import (
    PriorSpec,
    ResponseRecord,
    SamplerConfig,
    sample_posterior,
)
from prefsynth.response import OracleConfig, ResponseModel, simulate_response
from prefsynth.strategies import ItemPool, StrategyConfig, select_query

CSV_HEADER = [
    "trial",
    "query_index",
    "method",
    "mse",
    "kendall_tau",
    "selection_seconds",
    "mi_bits",
    "posterior_trace",
]


@dataclass(frozen=True)
class SyntheticSpec:
    d: int = 2
    n_items: int = 100
    item_box: tuple[float, float] = (-4.0, 4.0)
    user_box: tuple[float, float] = (-1.0, 1.0)
    trials: int = 5
    queries: int = 100
    sigma0: float = 0.1
    seed: int = 0


def generate_synthetic(spec: SyntheticSpec, rng: np.random.Generator):
    """N items ~ U(item_box)^d and a true user ~ U(user_box)^d."""
    items = rng.uniform(spec.item_box[0], spec.item_box[1], size=(spec.n_items, spec.d))
    w_star = rng.uniform(spec.user_box[0], spec.user_box[1], size=spec.d)
    return ItemPool(items=items), w_star


def load_embeddings(path) -> ItemPool:
    """Read an item pool from CSV: one item per row, optional '#' comment lines."""
    rows = []
    width = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read embeddings file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(csv.reader(fh), start=1):
            if not line or (line[0].lstrip().startswith("#")):
                continue
            try:
                vals = [float(x) for x in line]
            except ValueError as exc:
                raise ConfigError(f"{path}: row {lineno}: {exc}") from exc
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ConfigError(
                    f"{path}: row {lineno} has {len(vals)} columns, expected {width}"
                )
            for col, v in enumerate(vals, start=1):
                if not np.isfinite(v):
                    raise ConfigError(f"{path}: non-finite value at row {lineno}, column {col}")
            rows.append(vals)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return ItemPool(items=np.array(rows))


def save_embeddings(path, pool: ItemPool):
    with open(path, "w", newline="") as fh:
        fh.write(f"# d={pool.dim}\n")
        writer = csv.writer(fh)
        for row in pool.items:
            writer.writerow([repr(float(v)) for v in row])


def mse(w_hat, w_star) -> float:
    """Mean of squared per-axis errors, ||w_hat - w_star||^2 / d."""
    w_hat = np.asarray(w_hat, dtype=float)
    w_star = np.asarray(w_star, dtype=float)
    if w_hat.shape != w_star.shape:
        raise DimensionMismatchError(f"shapes differ: {w_hat.shape} vs {w_star.shape}")
    return float(np.mean((w_hat - w_star) ** 2))


def _distance_ranks(items, w):
    dist = np.linalg.norm(items - w, axis=1)
    order = np.lexsort((np.arange(len(dist)), dist))  # ties broken by item index
    ranks = np.empty(len(dist), dtype=int)
    ranks[order] = np.arange(len(dist))
    return ranks


def kendall_tau_distance(w_hat, w_star, pool: ItemPool) -> float:
    """Normalized discordant-pair count between the item rankings induced by
    distance to w_hat and to w_star."""
    r1 = _distance_ranks(pool.items, np.asarray(w_hat, dtype=float))
    r2 = _distance_ranks(pool.items, np.asarray(w_star, dtype=float))
    d1 = np.sign(r1[:, None] - r1[None, :])
    d2 = np.sign(r2[:, None] - r2[None, :])
    n = len(r1)
    discordant = np.sum((d1 * d2) < 0) // 2
    return float(discordant / (n * (n - 1) / 2))


@dataclass(frozen=True)
class RunRecord:
    trial: int
    query_index: int
    method: str
    mse: float
    kendall_tau: float
    selection_seconds: float
    mi_bits: float
    posterior_trace: float

    def row(self):
        return [
            self.trial,
            self.query_index,
            self.method,
            repr(self.mse),
            repr(self.kendall_tau),
            repr(self.selection_seconds),
            repr(self.mi_bits),
            repr(self.posterior_trace),
        ]


@dataclass(frozen=True)
class ExperimentConfig:
    spec: SyntheticSpec = field(default_factory=SyntheticSpec)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    oracle_mode: str = "model"
    oracle_sigma0: float | None = None  # defaults to the learner's sigma0
    prior: PriorSpec | None = None  # defaults to N(0, I)
    pool: ItemPool | None = None  # overrides synthetic item generation
    record_timing: bool = True  # False zeroes selection_seconds for byte-stable output


def _trial_seed(cfg: ExperimentConfig, trial: int) -> int:
    return cfg.spec.seed + 7919 * trial


def run_trial(cfg: ExperimentConfig, trial: int):
    """One trial of the active loop; yields a RunRecord per query index."""
    spec = cfg.spec
    rng = np.random.default_rng(_trial_seed(cfg, trial))
    if cfg.pool is not None:
        pool = cfg.pool
        w_star = pool.items[
            rng.integers(pool.n_items)
        ]  # hidden user drawn from the pool itself
    else:
        pool, w_star = generate_synthetic(spec, rng)
    model = ResponseModel(sigma0=spec.sigma0)
    oracle = OracleConfig(
        w_star=w_star,
        sigma0=cfg.oracle_sigma0 if cfg.oracle_sigma0 is not None else spec.sigma0,
        mode=cfg.oracle_mode,
    )
    prior = cfg.prior or PriorSpec.gaussian(np.zeros(spec.d), 1.0)
    strategy = cfg.strategy
    if strategy.method in ("info_synth", "random_synthesis") and strategy.continuous_bounds is None:
        strategy = dataclasses.replace(
            strategy,
            continuous_bounds=(
                np.full(spec.d, spec.item_box[0]),
                np.full(spec.d, spec.item_box[1]),
            ),
        )

    history = []

    def resample(qi, init=None):
        scfg = dataclasses.replace(
            cfg.sampler, seed=cfg.sampler.seed + 1_000_003 * trial + 101 * qi
        )
        return sample_posterior(prior, model, history, scfg, init=init)

    state = resample(0)

    def record(qi, sel_seconds, mi_bits):
        return RunRecord(
            trial=trial,
            query_index=qi,
            method=strategy.method,
            mse=mse(state.mean, w_star),
            kendall_tau=kendall_tau_distance(state.mean, w_star, pool),
            selection_seconds=sel_seconds if cfg.record_timing else 0.0,
            mi_bits=mi_bits,
            posterior_trace=state.trace,
        )

    yield record(0, 0.0, 0.0)
    converged = False
    for qi in range(1, spec.queries + 1):
        if converged:
            yield record(qi, 0.0, 0.0)
            continue
        try:
            sel = select_query(strategy, state, model, pool, history, rng)
        except DegeneratePosteriorError:
            # the posterior collapsed below float resolution; the estimate
            # cannot improve further, so hold it for the remaining rows
            converged = True
            yield record(qi, 0.0, 0.0)
            continue
        y = simulate_response(oracle, sel.pair, rng)
        history.append(
            ResponseRecord(
                pair=sel.pair, y=y, selection_time=sel.diagnostics["selection_seconds"]
            )
        )
        state = resample(qi, init=state.mean)
        yield record(
            qi,
            sel.diagnostics["selection_seconds"],
            sel.diagnostics["mi_of_selected"].value,
        )


def run_active_loop(cfg: ExperimentConfig):
    """All trials, sequential.  Yields RunRecord rows."""
    for trial in range(cfg.spec.trials):
        yield from run_trial(cfg, trial)


def write_records(path, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.row())
