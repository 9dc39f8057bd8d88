"""Interactive preference-session engine shared by the HTTP service and
library callers.

A session alternates (select query -> present payload -> record A/B choice ->
resample posterior).  All randomness derives from the configured seed, so a
recorded choice script replayed against a fresh engine reproduces the same
queries and final estimate bit for bit; crash recovery snapshots therefore
only need the config and the choice history.
"""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from prefsynth.errors import ConfigError, DivergedSimulationError
from prefsynth.posterior import (
    PriorSpec,
    ResponseRecord,
    SamplerConfig,
    sample_posterior,
)
from prefsynth.response import ResponseModel
from prefsynth.robosim import (
    BezierPath,
    GainVector,
    Scenario,
    _scenario_error,
    reference_polyline,
    simulate,
)
from prefsynth.strategies import ItemPool, StrategyConfig, select_query

MODES = ("gain_tuning", "generic_pairs")


@dataclass(frozen=True)
class SessionConfig:
    mode: str = "gain_tuning"
    seed: int = 0
    sigma0: float = 0.3
    method: str = "info_synth"
    max_queries: int = 50
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    # gain_tuning
    trajectory: int = 1
    start: str = "perfect"
    gain_bounds: tuple[float, float] = (0.05, 20.0)
    # generic_pairs
    dim: int = 2
    bounds: tuple[float, float] = (-4.0, 4.0)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.max_queries < 1:
            raise ConfigError("max_queries must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        data = dict(data)
        sampler = SamplerConfig(**data.pop("sampler", {}))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("gain_bounds", "bounds"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(sampler=sampler, **data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        return out


class SessionEngine:
    """Single-user preference loop with at most one outstanding query."""

    def __init__(self, config: SessionConfig):
        self.config = config
        cfg = config
        if cfg.mode == "gain_tuning":
            path = BezierPath.builtin(cfg.trajectory)
            self.scenario = Scenario(path=path, start=cfg.start)
            d = 3
            lo = np.full(3, math.log(cfg.gain_bounds[0]))
            hi = np.full(3, math.log(cfg.gain_bounds[1]))
        else:
            d = cfg.dim
            lo = np.full(d, cfg.bounds[0])
            hi = np.full(d, cfg.bounds[1])
        self.dim = d
        self.model = ResponseModel(sigma0=cfg.sigma0)
        self.prior = PriorSpec.gaussian(np.zeros(d), 1.0)
        self.strategy = StrategyConfig(method=cfg.method, continuous_bounds=(lo, hi))
        self.pool: ItemPool | None = None
        if cfg.method == "active_discrete":
            pool_rng = np.random.default_rng(cfg.seed + 500_009)
            self.pool = ItemPool(items=pool_rng.uniform(lo, hi, size=(50, d)))
        self.history: list[ResponseRecord] = []
        self.choices: list[str] = []
        self.query_id = 0
        self.current = None  # (query_id, pair, payload)
        self.state = self._resample()

    # -- core loop ---------------------------------------------------------

    def _resample(self):
        scfg = dataclasses.replace(
            self.config.sampler, seed=self.config.sampler.seed + self.config.seed
            + 101 * len(self.history)
        )
        prev = getattr(self, "state", None)
        return sample_posterior(
            self.prior, self.model, self.history, scfg,
            init=None if prev is None else prev.mean,
        )

    def _selection_rng(self):
        return np.random.default_rng(self.config.seed + 900_001 + self.query_id)

    @property
    def done(self) -> bool:
        return len(self.history) >= self.config.max_queries

    def next_query(self) -> dict:
        """Select (or repeat) the outstanding query payload."""
        if self.done:
            raise ConfigError("session is done")
        if self.current is not None:
            return self.current[2]
        self.query_id += 1
        sel = select_query(
            self.strategy, self.state, self.model, self.pool, self.history,
            self._selection_rng(),
        )
        payload = self._build_payload(self.query_id, sel.pair)
        self.current = (self.query_id, sel.pair, payload)
        return payload

    def submit_response(self, query_id: int, choice: str) -> dict:
        if choice not in ("A", "B"):
            raise ConfigError(f"choice must be 'A' or 'B', got {choice!r}")
        if self.current is None or query_id != self.current[0]:
            raise StaleQueryError(f"no outstanding query with id {query_id}")
        _, pair, _ = self.current
        self.history.append(ResponseRecord(pair=pair, y=1 if choice == "A" else 0))
        self.choices.append(choice)
        self.current = None
        self.state = self._resample()
        return self.estimate()

    def estimate(self) -> dict:
        mu = self.state.mean
        out = {
            "query_count": len(self.history),
            "posterior_trace": self.state.trace,
        }
        if self.config.mode == "gain_tuning":
            gains = GainVector.from_log(mu)
            err = _scenario_error(gains, [self.scenario])
            out["gains"] = [gains.k_x, gains.k_y, gains.k_theta]
            out["mean_tracking_error"] = err if math.isfinite(err) else None
        else:
            out["mu"] = mu.tolist()
        return out

    # -- payloads ----------------------------------------------------------

    def _build_payload(self, query_id, pair) -> dict:
        if self.config.mode == "generic_pairs":
            return {
                "query_id": query_id,
                "mode": "generic_pairs",
                "item_a": pair.p.tolist(),
                "item_b": pair.q.tolist(),
            }
        gains_a = GainVector.from_log(pair.p)
        gains_b = GainVector.from_log(pair.q)
        return {
            "query_id": query_id,
            "mode": "gain_tuning",
            "gains_a": [gains_a.k_x, gains_a.k_y, gains_a.k_theta],
            "gains_b": [gains_b.k_x, gains_b.k_y, gains_b.k_theta],
            "trajectory_a": _rollout_rows(gains_a, self.scenario),
            "trajectory_b": _rollout_rows(gains_b, self.scenario),
            "reference_path": reference_polyline(self.scenario.path).tolist(),
            "scenarios": [f"trajectory {self.config.trajectory}, {self.config.start}"],
        }

    # -- persistence -------------------------------------------------------

    def snapshot(self) -> dict:
        return {"config": self.config.to_dict(), "choices": list(self.choices)}

    @classmethod
    def restore(cls, snap: dict) -> "SessionEngine":
        engine = cls(SessionConfig.from_dict(snap["config"]))
        for choice in snap["choices"]:
            engine.next_query()
            engine.submit_response(engine.query_id, choice)
        return engine


class StaleQueryError(ConfigError):
    """Submitted query id does not match the outstanding query."""


def _rollout_rows(gains, scenario):
    try:
        traj = simulate(gains, scenario)
    except DivergedSimulationError:
        return []
    return np.column_stack([traj.times, traj.states]).tolist()


def run_scripted_session(config: SessionConfig, choices) -> dict:
    """Drive an engine through a fixed choice script; returns the final
    estimate.  The HTTP protocol must reproduce this exactly."""
    engine = SessionEngine(config)
    for choice in choices:
        engine.next_query()
        engine.submit_response(engine.query_id, choice)
    return engine.estimate()
