"""Bayesian posterior over the user point via adaptive random-walk Metropolis.

The posterior is p(w) ∝ p0(w) * prod_j P(Y_j | w), with the likelihood given
by the confidence-aware response model.  Summary statistics (mean, covariance,
principal eigenpair) are recomputed from the pooled post-burn-in samples.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from prefsynth.errors import DegeneratePosteriorError
from prefsynth.response import QueryPair, ResponseModel


@dataclass(frozen=True)
class PriorSpec:
    """Either an axis-aligned Gaussian or a uniform box."""

    kind: str = "gaussian"
    mean: np.ndarray | None = None
    stddev: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    @classmethod
    def gaussian(cls, mean, stddev) -> "PriorSpec":
        mean = np.asarray(mean, dtype=float)
        stddev = np.broadcast_to(np.asarray(stddev, dtype=float), mean.shape).copy()
        if np.any(stddev <= 0):
            raise ValueError("stddev must be positive")
        return cls(kind="gaussian", mean=mean, stddev=stddev)

    @classmethod
    def uniform_box(cls, lo, hi) -> "PriorSpec":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(lo >= hi):
            raise ValueError("lo must be strictly below hi componentwise")
        return cls(kind="uniform_box", lo=lo, hi=hi)

    @property
    def dim(self):
        return self.mean.size if self.kind == "gaussian" else self.lo.size

    def initial_point(self):
        if self.kind == "gaussian":
            return self.mean.copy()
        return 0.5 * (self.lo + self.hi)

    def log_density(self, w):
        """Log prior density up to a constant; -inf outside a box support.
        w may be batched (..., d)."""
        w = np.asarray(w, dtype=float)
        if self.kind == "gaussian":
            z = (w - self.mean) / self.stddev
            return -0.5 * np.sum(z**2, axis=-1)
        inside = np.all((w >= self.lo) & (w <= self.hi), axis=-1)
        return np.where(inside, 0.0, -np.inf)


@dataclass(frozen=True)
class ResponseRecord:
    pair: QueryPair
    y: int
    selection_time: float = 0.0

    def __post_init__(self):
        if self.y not in (0, 1):
            raise ValueError(f"y must be 0 or 1, got {self.y}")


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    burn_in: int = 500
    samples: int = 250
    target_accept: float = 0.3
    seed: int = 0
    initial_step: float = 0.5
    adapt_interval: int = 50


@dataclass(frozen=True)
class PosteriorState:
    """Pooled MCMC samples plus moment summaries and the principal eigenpair."""

    samples: np.ndarray  # (S, d)
    mean: np.ndarray
    cov: np.ndarray
    eigval: float
    eigvec: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.cov))

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "PosteriorState":
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise ValueError("need an (S, d) array with S >= 1")
        mean = samples.mean(axis=0)
        if samples.shape[0] == 1:
            cov = np.zeros((samples.shape[1], samples.shape[1]))
        else:
            cov = np.atleast_2d(np.cov(samples, rowvar=False, ddof=1))
        cov = 0.5 * (cov + cov.T)
        eigval, eigvec = power_iteration(cov)
        return cls(samples=samples, mean=mean, cov=cov, eigval=eigval, eigvec=eigvec)


def power_iteration(mat: np.ndarray, tol: float = 1e-8, max_iter: int = 200_000):
    """Principal eigenpair of a symmetric PSD matrix, deterministic start e1.

    Stops when ||M v - lam v|| <= tol * max(lam, tiny).  The returned vector's
    first nonzero component is positive so the direction is reproducible.
    """
    d = mat.shape[0]
    v = np.zeros(d)
    v[0] = 1.0
    lam = 0.0
    for _ in range(max_iter):
        mv = mat @ v
        norm = np.linalg.norm(mv)
        if norm == 0.0:
            lam = 0.0
            break
        v = mv / norm
        lam = float(v @ mat @ v)
        if np.linalg.norm(mat @ v - lam * v) <= tol * max(lam, 1e-300):
            break
    nz = np.flatnonzero(np.abs(v) > 0)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return lam, v


def _history_arrays(history):
    P = np.stack([r.pair.p for r in history])
    Q = np.stack([r.pair.q for r in history])
    Y = np.array([r.y for r in history], dtype=float)
    return P, Q, Y


def log_posterior(prior: PriorSpec, model: ResponseModel, history, w):
    """Log posterior density up to an additive constant.  Batched over the
    leading axes of w."""
    w = np.asarray(w, dtype=float)
    lp = prior.log_density(w)
    if not history:
        return lp
    P, Q, Y = _history_arrays(history)
    return lp + _log_likelihood(model, P, Q, Y, w)


def _log_likelihood(model, P, Q, Y, w):
    # f for every (w, record) combination: shape (..., n)
    A = np.sum((w[..., None, :] - Q) ** 2, axis=-1)
    B = np.sum((w[..., None, :] - P) ** 2, axis=-1)
    f = (A - B) / (model.sigma0 * np.sqrt(A**2 + B**2))
    # y=1 contributes log cdf(f), y=0 contributes log cdf(-f)
    return np.sum(model.link.log_cdf(np.where(Y > 0.5, f, -f)), axis=-1)


def sample_posterior(
    prior: PriorSpec,
    model: ResponseModel,
    history,
    cfg: SamplerConfig,
    rng: np.random.Generator | None = None,
    init: np.ndarray | None = None,
) -> PosteriorState:
    """Adaptive random-walk Metropolis with per-axis Gaussian proposals.

    All chains start at the posterior mode located by L-BFGS from `init`
    (default: the prior center); with a sharp likelihood the density far from
    the mode is a broad plateau that a random walk started at the prior center
    almost never escapes, so active loops should pass the previous posterior
    mean as `init`.  Each chain owns its random stream (seed = cfg.seed + chain
    index); the scalar step size is tuned toward cfg.target_accept during
    burn-in and frozen afterwards.  The `rng` argument is unused — kept so
    callers can thread one through uniformly — because determinism is pinned
    to cfg.seed.
    """
    if cfg.chains < 1 or cfg.samples < 2 or cfg.burn_in < 0:
        raise ValueError("need chains >= 1, samples >= 2, burn_in >= 0")
    d = prior.dim
    C = cfg.chains
    gens = [np.random.default_rng(cfg.seed + c) for c in range(C)]

    if history:
        P, Q, Y = _history_arrays(history)

        def logpost(w):
            return prior.log_density(w) + _log_likelihood(model, P, Q, Y, w)

    else:

        def logpost(w):
            return prior.log_density(w)

    start = prior.initial_point()
    step0 = cfg.initial_step
    if init is not None:
        init = np.asarray(init, dtype=float)
        if init.shape == start.shape and np.isfinite(logpost(init)):
            start = init
    if history:
        bounds = list(zip(prior.lo, prior.hi)) if prior.kind == "uniform_box" else None
        res = minimize(lambda w: -logpost(w), start, method="L-BFGS-B", bounds=bounds)
        if np.isfinite(res.fun) and np.isfinite(logpost(res.x)):
            start = res.x
        # seed the proposal scale from the width of the mode: per axis, the
        # largest offset whose log-posterior drop stays below 1.  Burn-in
        # adaptation is multiplicative and can only move the step by ~20x,
        # far too little when the posterior is orders of magnitude narrower
        # than the prior.
        lp0 = float(logpost(start))
        offsets = np.logspace(-15, 6, 43)
        widths = np.empty(d)
        for i in range(d):
            pts = start + offsets[:, None] * np.eye(d)[i]
            drops = lp0 - logpost(pts)
            keep = offsets[np.isfinite(drops) & (drops <= 1.0)]
            widths[i] = keep.max() if keep.size else step0
        step0 = min(step0, 2.38 * float(np.sqrt(np.mean(widths**2))) / math.sqrt(d))
    theta = np.tile(start, (C, 1))
    lp = logpost(theta)
    if not np.all(np.isfinite(lp)):
        raise DegeneratePosteriorError("non-finite log posterior at the initial point")

    step = np.full(C, step0)
    accepted = np.zeros(C)
    out = np.empty((C, cfg.samples, d))

    total = cfg.burn_in + cfg.samples
    for it in range(total):
        noise = np.stack([g.standard_normal(d) for g in gens])
        unif = np.array([g.random() for g in gens])
        prop = theta + step[:, None] * noise
        lp_prop = logpost(prop)
        with np.errstate(invalid="ignore"):
            accept = np.log(unif) < (lp_prop - lp)
        theta = np.where(accept[:, None], prop, theta)
        lp = np.where(accept, lp_prop, lp)
        accepted += accept

        in_burn = it < cfg.burn_in
        if in_burn and (it + 1) % cfg.adapt_interval == 0:
            rate = accepted / cfg.adapt_interval
            step = np.clip(step * np.exp(rate - cfg.target_accept), 1e-300, 1e8)
            accepted[:] = 0.0
        if not in_burn:
            out[:, it - cfg.burn_in, :] = theta

    pooled = out.reshape(C * cfg.samples, d)
    return PosteriorState.from_samples(pooled)


def estimate_user(state: PosteriorState) -> np.ndarray:
    """Posterior-mean point estimate of the user."""
    return state.mean.copy()
