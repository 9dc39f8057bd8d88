"""Unicycle trajectory tracking: Bezier reference paths, the gain-parameterized
controller, a Hausdorff tracking-error oracle, and the log-space gain-tuning
loop driven by pairwise preferences.

Controller (local-frame errors, gains k_x, k_y, k_theta):
    e_x = cos(theta) dx + sin(theta) dy
    e_y = -sin(theta) dx + cos(theta) dy
    e_theta = wrap(theta_des - theta)
    v_cmd = v_des cos(e_theta) + k_x e_x
    w_cmd = w_des + k_y v_des e_y + k_theta sin(e_theta)
Dynamics integrate with explicit Euler at dt = 0.02 s.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from prefsynth.errors import (
    ConfigError,
    DegeneratePosteriorError,
    DivergedSimulationError,
)
from prefsynth.posterior import (
    PriorSpec,
    ResponseRecord,
    SamplerConfig,
    sample_posterior,
)
from prefsynth.response import QueryPair, ResponseModel
from prefsynth.strategies import ItemPool, StrategyConfig, select_query

logger = logging.getLogger(__name__)

DEFAULT_DT = 0.02

# Built-in reference paths: standard, hairpin, high-curvature, figure-8.
TRAJECTORY_CONTROL_POINTS = {
    1: [[0, 0], [2, 4], [6, -2], [8, 0]],
    2: [[0, 0], [2, 5], [4, -5], [6, 5], [8, 0]],
    3: [[0, 0], [5, 0], [5, 0], [5, 5]],
    4: [[0, 0], [4, 4], [8, -4], [4, -4], [0, 4]],
}

START_MODES = ("perfect", "lateral_error", "heading_error")


@dataclass(frozen=True)
class GainVector:
    k_x: float
    k_y: float
    k_theta: float

    def __post_init__(self):
        if min(self.k_x, self.k_y, self.k_theta) <= 0:
            raise ConfigError("gains must be strictly positive")

    def as_array(self):
        return np.array([self.k_x, self.k_y, self.k_theta])

    @classmethod
    def from_log(cls, w) -> "GainVector":
        g = np.exp(np.asarray(w, dtype=float))
        return cls(k_x=float(g[0]), k_y=float(g[1]), k_theta=float(g[2]))


@dataclass(frozen=True)
class BezierPath:
    control_points: np.ndarray  # (n+1, 2)
    t_period: float = 10.0
    t_final: float = 12.0

    def __post_init__(self):
        pts = np.asarray(self.control_points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise ConfigError("need at least 2 control points in 2-D")
        if not (self.t_final >= self.t_period > 0):
            raise ConfigError("need t_final >= t_period > 0")
        object.__setattr__(self, "control_points", pts)

    @classmethod
    def builtin(cls, index: int, t_period: float = 1.5, t_final: float = 1.8) -> "BezierPath":
        if index not in TRAJECTORY_CONTROL_POINTS:
            raise ConfigError(f"unknown trajectory {index}; choose from {sorted(TRAJECTORY_CONTROL_POINTS)}")
        return cls(TRAJECTORY_CONTROL_POINTS[index], t_period=t_period, t_final=t_final)


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float  # wrapped to (-pi, pi]

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray  # (T,)
    states: np.ndarray  # (T, 3) rows of (x, y, theta)
    dt: float = DEFAULT_DT

    @property
    def positions(self):
        return self.states[:, :2]


@dataclass(frozen=True)
class Scenario:
    path: BezierPath
    start: str = "perfect"

    def __post_init__(self):
        if self.start not in START_MODES:
            raise ConfigError(f"unknown start {self.start!r}; choose from {START_MODES}")


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def _casteljau(points, t):
    b = points.copy()
    for _ in range(len(points) - 1):
        b = (1.0 - t) * b[:-1] + t * b[1:]
    return b[0]


def bezier_eval(path: BezierPath, t_phase: float):
    """Position, first, and second derivative with respect to phase via
    De Casteljau on the control-point difference curves."""
    if not 0.0 <= t_phase <= 1.0:
        raise ValueError(f"t_phase must lie in [0, 1], got {t_phase}")
    pts = path.control_points
    n = pts.shape[0] - 1
    pos = _casteljau(pts, t_phase)
    d1_pts = n * np.diff(pts, axis=0)
    vel = _casteljau(d1_pts, t_phase)
    if n >= 2:
        d2_pts = (n - 1) * np.diff(d1_pts, axis=0)
        acc = _casteljau(d2_pts, t_phase)
    else:
        acc = np.zeros(2)
    return pos, vel, acc


def reference_state(path: BezierPath, sim_time: float, theta_fallback: float = 0.0):
    """Desired (position, heading, speed, turn rate) at a simulation time.

    Phase is sim_time / t_period clamped to [0, 1]; past phase 1 the endpoint
    is held with zero feedforward.  At a cusp (zero tangent) the curvature is
    defined as 0 and the heading falls back to `theta_fallback`.
    """
    phase = min(max(sim_time / path.t_period, 0.0), 1.0)
    pos, dvel, dacc = bezier_eval(path, phase)
    if sim_time >= path.t_period:
        return pos, _tangent_heading(dvel, theta_fallback), 0.0, 0.0
    vel = dvel / path.t_period
    speed = float(np.linalg.norm(vel))
    if np.linalg.norm(dvel) == 0.0:
        return pos, theta_fallback, 0.0, 0.0
    theta_des = math.atan2(vel[1], vel[0])
    cross = dvel[0] * dacc[1] - dvel[1] * dacc[0]
    kappa = cross / np.linalg.norm(dvel) ** 3
    omega_des = speed * kappa
    return pos, theta_des, speed, float(omega_des)


def _tangent_heading(dvel, fallback):
    if np.linalg.norm(dvel) == 0.0:
        return fallback
    return math.atan2(dvel[1], dvel[0])


def control_step(gains: GainVector, state: RobotState, reference):
    """Velocity and turn-rate commands from local tracking errors."""
    pos_des, theta_des, v_des, omega_des = reference
    dx = pos_des[0] - state.x
    dy = pos_des[1] - state.y
    c, s = math.cos(state.theta), math.sin(state.theta)
    e_x = c * dx + s * dy
    e_y = -s * dx + c * dy
    e_theta = wrap_angle(theta_des - state.theta)
    v_cmd = v_des * math.cos(e_theta) + gains.k_x * e_x
    omega_cmd = omega_des + gains.k_y * v_des * e_y + gains.k_theta * math.sin(e_theta)
    return v_cmd, omega_cmd


def initial_state(scenario: Scenario) -> RobotState:
    pts = scenario.path.control_points
    _, dvel, _ = bezier_eval(scenario.path, 0.0)
    if np.linalg.norm(dvel) == 0.0:
        # repeated leading control point: take the first nonzero difference
        diffs = np.diff(pts, axis=0)
        nz = np.flatnonzero(np.linalg.norm(diffs, axis=1) > 0)
        dvel = diffs[nz[0]] if nz.size else np.array([1.0, 0.0])
    heading = math.atan2(dvel[1], dvel[0])
    x, y = pts[0]
    if scenario.start == "perfect":
        return RobotState(x, y, heading)
    if scenario.start == "lateral_error":
        # 1 unit along the left normal of the initial tangent
        return RobotState(x - math.sin(heading), y + math.cos(heading), heading)
    return RobotState(x, y, heading + math.pi / 4.0)


def simulate(gains: GainVector, scenario: Scenario, dt: float = DEFAULT_DT) -> Trajectory:
    """Explicit-Euler rollout for t in [0, t_final]."""
    if dt <= 0:
        raise ConfigError("dt must be positive")
    path = scenario.path
    n_steps = int(round(path.t_final / dt))
    state = initial_state(scenario)
    x, y, theta = state.x, state.y, state.theta
    times = np.arange(n_steps + 1) * dt
    states = np.empty((n_steps + 1, 3))
    states[0] = (x, y, theta)
    theta_prev_des = theta
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            ref = reference_state(path, times[i], theta_fallback=theta_prev_des)
            theta_prev_des = ref[1]
            v, omega = control_step(gains, RobotState(x, y, theta), ref)
            x += v * math.cos(theta) * dt
            y += v * math.sin(theta) * dt
            theta = wrap_angle(theta + omega * dt)
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(theta)):
                raise DivergedSimulationError(
                    f"state became non-finite at t={times[i + 1]:.2f} with gains {gains}"
                )
            states[i + 1] = (x, y, theta)
    return Trajectory(times=times, states=states, dt=dt)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point sets."""
    d = cdist(a, b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def reference_polyline(path: BezierPath, n: int = 200) -> np.ndarray:
    phases = np.linspace(0.0, 1.0, n)
    return np.array([bezier_eval(path, t)[0] for t in phases])


def tracking_error(traj: Trajectory, path: BezierPath, n_ref: int = 200) -> float:
    """Hausdorff distance between the rollout positions and the reference path
    discretized at uniform phases."""
    return hausdorff(traj.positions, reference_polyline(path, n_ref))


def _scenario_error(gains: GainVector, scenarios, dt=DEFAULT_DT):
    """Mean tracking error over the scenario set; inf marks divergence."""
    errs = []
    for sc in scenarios:
        try:
            errs.append(tracking_error(simulate(gains, sc, dt=dt), sc.path))
        except DivergedSimulationError:
            errs.append(math.inf)
    return float(np.mean(errs))


def gain_oracle(gains_a: GainVector, gains_b: GainVector, scenarios, kappa: float,
                rng: np.random.Generator, dt: float = DEFAULT_DT) -> int:
    """Sigmoid preference on mean tracking errors: P(prefer A) =
    1/(1 + exp(-kappa (err_B - err_A))).  A diverged side is scored as 10x the
    worst finite error in the comparison; two diverged sides are a coin flip."""
    if kappa <= 0 or not scenarios:
        raise ConfigError("kappa must be positive and scenarios nonempty")
    err_a = _scenario_error(gains_a, scenarios, dt)
    err_b = _scenario_error(gains_b, scenarios, dt)
    if math.isinf(err_a) and math.isinf(err_b):
        logger.warning("both candidate gains diverged; answering at random")
        return int(rng.random() < 0.5)
    worst = max(e for e in (err_a, err_b) if math.isfinite(e))
    penalty = 10.0 * worst if worst > 0 else 1.0
    err_a = err_a if math.isfinite(err_a) else penalty
    err_b = err_b if math.isfinite(err_b) else penalty
    prob_a = 1.0 / (1.0 + math.exp(-kappa * (err_b - err_a)))
    return int(rng.random() < prob_a)


@dataclass(frozen=True)
class TuningConfig:
    scenarios: tuple = ()
    strategy: StrategyConfig = field(default_factory=lambda: StrategyConfig(method="info_synth"))
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    queries: int = 30
    kappa: float = 5.0
    # learner's assumed response noise; 0.3 keeps the posterior broad enough
    # that synthesized queries stay in the regime where the kappa=5 error
    # oracle is actually discriminative
    sigma0: float = 0.3
    seed: int = 0
    gain_bounds: tuple[float, float] = (0.05, 20.0)
    pool_size: int = 50  # gains sampled for active_discrete
    dt: float = DEFAULT_DT

    def log_bounds(self):
        lo, hi = self.gain_bounds
        return np.full(3, math.log(lo)), np.full(3, math.log(hi))


@dataclass(frozen=True)
class TuneRecord:
    query_index: int
    gains: GainVector
    mean_error: float
    posterior_trace: float


def tune_gains(cfg: TuningConfig):
    """Preference-based gain tuning in log space.  Yields a TuneRecord per
    query with the running posterior-mean gains and their tracking error."""
    if not cfg.scenarios:
        raise ConfigError("need at least one scenario")
    if cfg.strategy.method not in ("info_synth", "active_discrete", "random_synthesis"):
        raise ConfigError(f"unsupported tuning strategy {cfg.strategy.method!r}")
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.log_bounds()
    strategy = cfg.strategy
    if strategy.continuous_bounds is None:
        strategy = dataclasses.replace(strategy, continuous_bounds=(lo, hi))
    pool = None
    if strategy.method == "active_discrete":
        pool = ItemPool(items=rng.uniform(lo, hi, size=(cfg.pool_size, 3)))

    prior = PriorSpec.gaussian(np.zeros(3), 1.0)  # log-gains around log(1) = 0
    model = ResponseModel(sigma0=cfg.sigma0)
    history = []

    def resample(qi, init=None):
        scfg = dataclasses.replace(cfg.sampler, seed=cfg.sampler.seed + 101 * qi)
        return sample_posterior(prior, model, history, scfg, init=init)

    state = resample(0)

    def record(qi):
        gains = GainVector.from_log(state.mean)
        return TuneRecord(
            query_index=qi,
            gains=gains,
            mean_error=_scenario_error(gains, cfg.scenarios, cfg.dt),
            posterior_trace=state.trace,
        )

    yield record(0)
    converged = False
    for qi in range(1, cfg.queries + 1):
        if converged:
            yield record(qi)
            continue
        try:
            sel = select_query(strategy, state, model, pool, history, rng)
        except DegeneratePosteriorError:
            # posterior collapsed below float resolution; hold the estimate
            converged = True
            yield record(qi)
            continue
        y = gain_oracle(
            GainVector.from_log(sel.pair.p),
            GainVector.from_log(sel.pair.q),
            cfg.scenarios,
            cfg.kappa,
            rng,
            cfg.dt,
        )
        history.append(ResponseRecord(pair=sel.pair, y=y))
        state = resample(qi, init=state.mean)
        yield record(qi)
