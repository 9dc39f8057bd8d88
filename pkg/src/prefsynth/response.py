"""Confidence-aware pairwise response model and simulated oracles.

The response score for a user point w and item pair (p, q) is

    f(w) = (||w - q||^2 - ||w - p||^2) / (sigma0 * sqrt(||w - q||^4 + ||w - p||^4))

so that the response probability P(prefer p) = link.cdf(f(w)).  The noise
grows with the squared query distances: pairs that are nearly identical or
entirely dissimilar both score near zero and yield near-coin-flip responses.
"""

from dataclasses import dataclass, field

import numpy as np

from prefsynth.errors import DegenerateQueryError, DimensionMismatchError
from prefsynth.links import LogisticLink


@dataclass(frozen=True)
class QueryPair:
    """An ordered pair of items in the same embedding space."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if p.ndim != 1 or q.ndim != 1 or p.shape != q.shape or p.size < 1:
            raise DimensionMismatchError(
                f"p and q must be 1-D vectors of equal dimension, got {p.shape} and {q.shape}"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def dim(self):
        return self.p.size

    def swapped(self):
        return QueryPair(self.q, self.p)


@dataclass(frozen=True)
class Hyperplane:
    """Bisecting hyperplane of a pair: a = 2(p - q), tau = ||p||^2 - ||q||^2,
    b = (p + q)/2.  The midpoint satisfies a^T b - tau = 0."""

    a: np.ndarray
    tau: float
    b: np.ndarray

    @classmethod
    def from_pair(cls, pair: QueryPair) -> "Hyperplane":
        a = 2.0 * (pair.p - pair.q)
        tau = float(pair.p @ pair.p - pair.q @ pair.q)
        b = 0.5 * (pair.p + pair.q)
        return cls(a=a, tau=tau, b=b)


@dataclass(frozen=True)
class ResponseModel:
    sigma0: float = 1.0
    link: LogisticLink = field(default_factory=LogisticLink)

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")


def _check_dim(w, d):
    if w.shape[-1] != d:
        raise DimensionMismatchError(
            f"user point dimension {w.shape[-1]} != query dimension {d}"
        )


def f_value(model: ResponseModel, w, pair: QueryPair):
    """Response score f(w).  Supports batched w of shape (..., d)."""
    w = np.asarray(w, dtype=float)
    _check_dim(w, pair.dim)
    A = np.sum((w - pair.q) ** 2, axis=-1)  # ||w - q||^2
    B = np.sum((w - pair.p) ** 2, axis=-1)  # ||w - p||^2
    denom = model.sigma0 * np.sqrt(A**2 + B**2)
    if np.any(denom == 0.0):
        raise DegenerateQueryError("w coincides with both p and q; score undefined")
    return (A - B) / denom


def f_value_hyperplane(model: ResponseModel, w, h: Hyperplane):
    """Response score in hyperplane form; identical to f_value for the
    hyperplane built from the same pair."""
    w = np.asarray(w, dtype=float)
    _check_dim(w, h.a.size)
    delta = w - h.b
    num = delta @ h.a
    u = np.sum(delta**2, axis=-1) + (h.a @ h.a) / 16.0
    denom = model.sigma0 * np.sqrt(2.0 * u**2 + 0.5 * num**2)
    if np.any(denom == 0.0):
        raise DegenerateQueryError("degenerate hyperplane query (a = 0 and w = b)")
    return num / denom


def response_probability(model: ResponseModel, w, pair: QueryPair):
    """P(prefer p over q) = link.cdf(f(w))."""
    return model.link.cdf(f_value(model, w, pair))


@dataclass(frozen=True)
class OracleConfig:
    """Simulated responder holding the hidden true point.

    mode "model": Y ~ Bernoulli(link.cdf(f(w*))) with the oracle's own sigma0.
    mode "deterministic": Y = 1 iff w* is strictly closer to p than to q.
    """

    w_star: np.ndarray
    sigma0: float = 1.0
    mode: str = "model"
    link: LogisticLink = field(default_factory=LogisticLink)

    def __post_init__(self):
        object.__setattr__(self, "w_star", np.asarray(self.w_star, dtype=float))
        if self.mode not in ("model", "deterministic"):
            raise ValueError(f"unknown oracle mode {self.mode!r}")


def simulate_response(oracle: OracleConfig, pair: QueryPair, rng: np.random.Generator) -> int:
    if oracle.mode == "deterministic":
        dp = np.sum((oracle.w_star - pair.p) ** 2)
        dq = np.sum((oracle.w_star - pair.q) ** 2)
        return int(dp < dq)
    model = ResponseModel(sigma0=oracle.sigma0, link=oracle.link)
    prob = response_probability(model, oracle.w_star, pair)
    return int(rng.random() < prob)
