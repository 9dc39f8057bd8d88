"""Query-selection strategies over a fixed item pool and in continuous space.

Pool methods share a filter-and-refine shape: rank candidate pairs by a cheap
criterion, then evaluate mutual information on the surviving fraction and
return the argmax.  Ties are always broken by the lexicographically smallest
(i, j) so replays are deterministic.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from prefsynth.errors import ConfigError, PoolExhaustedError
from prefsynth.infogain import (
    MIEstimate,
    build_metric,
    mahalanobis_distance_many,
    mutual_information,
    mutual_information_many,
)
from prefsynth.posterior import PosteriorState
from prefsynth.response import QueryPair, ResponseModel
from prefsynth.synthesis import synthesize

MDIST_DIM_LIMIT = 32


@dataclass(frozen=True)
class ItemPool:
    """Embedded items for the constrained setting."""

    items: np.ndarray  # (N, d)
    candidate_pairs: np.ndarray | None = None  # (P, 2) int, i < j

    def __post_init__(self):
        items = np.asarray(self.items, dtype=float)
        if items.ndim != 2 or items.shape[0] < 2:
            raise ConfigError("pool needs an (N, d) array with N >= 2")
        if not np.all(np.isfinite(items)):
            raise ConfigError("pool items must be finite")
        object.__setattr__(self, "items", items)
        if self.candidate_pairs is not None:
            cp = np.asarray(self.candidate_pairs, dtype=int)
            n = items.shape[0]
            if cp.ndim != 2 or cp.shape[1] != 2:
                raise ConfigError("candidate_pairs must be (P, 2)")
            if np.any(cp[:, 0] >= cp[:, 1]) or np.any(cp < 0) or np.any(cp >= n):
                raise ConfigError("candidate pairs must satisfy 0 <= i < j < N")
            if len({(int(i), int(j)) for i, j in cp}) != cp.shape[0]:
                raise ConfigError("duplicate candidate pairs")
            object.__setattr__(self, "candidate_pairs", cp)

    @property
    def n_items(self):
        return self.items.shape[0]

    @property
    def dim(self):
        return self.items.shape[1]

    def all_pairs(self) -> np.ndarray:
        if self.candidate_pairs is not None:
            return self.candidate_pairs
        i, j = np.triu_indices(self.n_items, k=1)
        return np.column_stack([i, j])


METHODS = (
    "info_synth",
    "pair_m_dist",
    "pair_opt_dist",
    "knn_approx",
    "nn_approx",
    "active_discrete",
    "random_discrete",
    "random_synthesis",
)


@dataclass(frozen=True)
class StrategyConfig:
    method: str = "info_synth"
    alpha: float = 0.05  # M-dist: fraction of pairs kept for MI refinement
    beta: float = 0.3  # k-NN: fraction of the k^2 combos MI-evaluated
    gamma: float = 0.2  # Opt-dist: fraction of pairs kept for MI refinement
    k: int = 10
    zeta: float = 0.1
    pair_cap: int = 200_000
    continuous_bounds: tuple | None = None  # (lo, hi) arrays for synthesis methods
    no_repeat: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {v}")
        if self.k < 1 or self.pair_cap < 1:
            raise ConfigError("k and pair_cap must be >= 1")


@dataclass
class SelectionResult:
    pair: QueryPair
    pair_indices: tuple[int, int] | None
    diagnostics: dict = field(default_factory=dict)


def _used_index_pairs(pool: ItemPool, history):
    """Indices of pool pairs already asked, matched by exact item values."""
    lookup = {row.tobytes(): idx for idx, row in enumerate(pool.items)}
    used = set()
    for rec in history:
        i = lookup.get(np.ascontiguousarray(rec.pair.p).tobytes())
        j = lookup.get(np.ascontiguousarray(rec.pair.q).tobytes())
        if i is not None and j is not None:
            used.add((min(i, j), max(i, j)))
    return used


def _candidate_pairs(pool, cfg, history, rng):
    pairs = pool.all_pairs()
    if cfg.no_repeat and history:
        used = _used_index_pairs(pool, history)
        if used:
            keep = np.array([(int(i), int(j)) not in used for i, j in pairs])
            pairs = pairs[keep]
    if pairs.shape[0] == 0:
        raise PoolExhaustedError("no candidate pair left (no_repeat exhausted the pool)")
    if pairs.shape[0] > cfg.pair_cap:
        idx = rng.choice(pairs.shape[0], size=cfg.pair_cap, replace=False)
        pairs = pairs[np.sort(idx)]
    return pairs


def _mi_refine(state, model, pool, pairs, result_extra=None):
    """MI-evaluate candidate index pairs and return the argmax selection.
    `pairs` must already be in deterministic order; the first maximum wins."""
    P = pool.items[pairs[:, 0]]
    Q = pool.items[pairs[:, 1]]
    values, pis = mutual_information_many(state, model, P, Q)
    best = int(np.argmax(values))
    i, j = int(pairs[best, 0]), int(pairs[best, 1])
    diag = {
        "n_mi_evals": int(pairs.shape[0]),
        "mi_of_selected": MIEstimate(
            value=float(values[best]), pi=float(pis[best]), n_samples=state.samples.shape[0]
        ),
    }
    if result_extra:
        diag.update(result_extra)
    return SelectionResult(
        pair=QueryPair(pool.items[i], pool.items[j]), pair_indices=(i, j), diagnostics=diag
    )


def _sort_lex(pairs):
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def active_discrete(state, model, pool, cfg, history=(), rng=None):
    rng = rng if rng is not None else np.random.default_rng(0)
    pairs = _candidate_pairs(pool, cfg, history, rng)
    return _mi_refine(state, model, pool, pairs, {"n_filtered": int(pairs.shape[0])})


def pair_m_dist(state, model, pool, cfg, history=(), rng=None):
    if pool.dim > MDIST_DIM_LIMIT:
        warnings.warn(
            f"pair_m_dist builds a {2 * pool.dim}x{2 * pool.dim} Hessian; "
            f"consider pair_opt_dist above d={MDIST_DIM_LIMIT}",
            RuntimeWarning,
            stacklevel=2,
        )
    rng = rng if rng is not None else np.random.default_rng(0)
    pairs = _candidate_pairs(pool, cfg, history, rng)
    synth = synthesize(state, model)
    metric = build_metric(state, model, synth.pair)
    dists = mahalanobis_distance_many(metric, pool.items[pairs[:, 0]], pool.items[pairs[:, 1]])
    n_keep = int(np.ceil(cfg.alpha * pairs.shape[0]))
    order = np.lexsort((pairs[:, 1], pairs[:, 0], dists))
    kept = pairs[order[:n_keep]]
    return _mi_refine(state, model, pool, kept, {"n_filtered": n_keep})


def pair_opt_dist(state, model, pool, cfg, history=(), rng=None):
    rng = rng if rng is not None else np.random.default_rng(0)
    var = np.diag(state.cov)
    if np.any(var <= 0):
        raise ConfigError("pair_opt_dist needs strictly positive marginal variances")
    pairs = _candidate_pairs(pool, cfg, history, rng)
    synth = synthesize(state, model)
    lam = cfg.zeta * pool.dim / state.trace
    target = 2.0 * synth.r_tilde * synth.direction
    P = pool.items[pairs[:, 0]]
    Q = pool.items[pairs[:, 1]]
    mid = 0.5 * (P + Q)
    mid_term = np.sum((mid - state.mean) ** 2 / var, axis=1)
    diff = P - Q
    eta_fwd = mid_term + lam * np.sum((diff - target) ** 2, axis=1)
    eta_rev = mid_term + lam * np.sum((-diff - target) ** 2, axis=1)
    eta = np.minimum(eta_fwd, eta_rev)
    n_keep = int(np.ceil(cfg.gamma * pairs.shape[0]))
    order = np.lexsort((pairs[:, 1], pairs[:, 0], eta))
    kept = pairs[order[:n_keep]]
    return _mi_refine(state, model, pool, kept, {"n_filtered": n_keep, "lambda": lam})


def knn_approx(state, model, pool, cfg, history=(), rng=None):
    k = cfg.k
    if k > pool.n_items:
        raise ConfigError(f"k={k} exceeds pool size {pool.n_items}")
    rng = rng if rng is not None else np.random.default_rng(0)
    synth = synthesize(state, model)
    p_t, q_t = synth.pair.p, synth.pair.q
    dist_p = np.linalg.norm(pool.items - p_t, axis=1)
    dist_q = np.linalg.norm(pool.items - q_t, axis=1)
    p_set = np.argsort(dist_p, kind="stable")[:k]
    q_set = np.argsort(dist_q, kind="stable")[:k]
    ii, jj = np.meshgrid(p_set, q_set, indexing="ij")
    combos = np.column_stack([ii.ravel(), jj.ravel()])
    combos = combos[combos[:, 0] != combos[:, 1]]
    if cfg.no_repeat and history:
        used = _used_index_pairs(pool, history)
        if used:
            keep = np.array(
                [(min(i, j), max(i, j)) not in used for i, j in combos], dtype=bool
            )
            combos = combos[keep]
    if combos.shape[0] == 0:
        raise PoolExhaustedError("no k-NN combo left")
    score = dist_p[combos[:, 0]] + dist_q[combos[:, 1]]
    n_keep = min(int(np.ceil(cfg.beta * k * k)), combos.shape[0])
    order = np.lexsort((combos[:, 1], combos[:, 0], score))
    kept = combos[order[:n_keep]]
    P = pool.items[kept[:, 0]]
    Q = pool.items[kept[:, 1]]
    values, pis = mutual_information_many(state, model, P, Q)
    best = int(np.argmax(values))
    i, j = int(kept[best, 0]), int(kept[best, 1])
    return SelectionResult(
        pair=QueryPair(pool.items[i], pool.items[j]),
        pair_indices=(i, j),
        diagnostics={
            "n_filtered": n_keep,
            "n_mi_evals": int(kept.shape[0]),
            "mi_of_selected": MIEstimate(
                value=float(values[best]), pi=float(pis[best]), n_samples=state.samples.shape[0]
            ),
        },
    )


def random_discrete(pool, cfg, history=(), rng=None):
    rng = rng if rng is not None else np.random.default_rng(0)
    pairs = _candidate_pairs(pool, cfg, history, rng)
    idx = int(rng.integers(pairs.shape[0]))
    i, j = int(pairs[idx, 0]), int(pairs[idx, 1])
    return SelectionResult(
        pair=QueryPair(pool.items[i], pool.items[j]),
        pair_indices=(i, j),
        diagnostics={"n_mi_evals": 0},
    )


def random_synthesis(cfg, rng):
    lo, hi = _bounds(cfg)
    p = rng.uniform(lo, hi)
    q = rng.uniform(lo, hi)
    return SelectionResult(pair=QueryPair(p, q), pair_indices=None, diagnostics={"n_mi_evals": 0})


def _bounds(cfg):
    if cfg.continuous_bounds is None:
        raise ConfigError("continuous_bounds required for synthesis methods")
    lo = np.asarray(cfg.continuous_bounds[0], dtype=float)
    hi = np.asarray(cfg.continuous_bounds[1], dtype=float)
    if np.any(lo >= hi):
        raise ConfigError("degenerate continuous bounds")
    return lo, hi


def select_query(
    strategy: StrategyConfig,
    state: PosteriorState,
    model: ResponseModel,
    pool: ItemPool | None,
    history=(),
    rng: np.random.Generator | None = None,
) -> SelectionResult:
    """Dispatch to the configured method and time the selection."""
    rng = rng if rng is not None else np.random.default_rng(0)
    method = strategy.method
    pool_methods = {"pair_m_dist", "pair_opt_dist", "knn_approx", "nn_approx",
                    "active_discrete", "random_discrete"}
    if method in pool_methods and pool is None:
        raise ConfigError(f"method {method!r} requires an item pool")

    t0 = time.perf_counter()
    if method == "info_synth":
        synth = synthesize(state, model)
        result = SelectionResult(pair=synth.pair, pair_indices=None, diagnostics={"n_mi_evals": 0})
    elif method == "random_synthesis":
        result = random_synthesis(strategy, rng)
    elif method == "random_discrete":
        result = random_discrete(pool, strategy, history, rng)
    elif method == "active_discrete":
        result = active_discrete(state, model, pool, strategy, history, rng)
    elif method == "pair_m_dist":
        result = pair_m_dist(state, model, pool, strategy, history, rng)
    elif method == "pair_opt_dist":
        result = pair_opt_dist(state, model, pool, strategy, history, rng)
    elif method == "knn_approx":
        result = knn_approx(state, model, pool, strategy, history, rng)
    else:  # nn_approx: single nearest neighbor of each synthesized point
        from dataclasses import replace

        result = knn_approx(state, model, pool, replace(strategy, k=1, beta=1.0), history, rng)
    result.diagnostics["selection_seconds"] = time.perf_counter() - t0
    if "mi_of_selected" not in result.diagnostics:
        result.diagnostics["mi_of_selected"] = mutual_information(state, model, result.pair)
    return result
