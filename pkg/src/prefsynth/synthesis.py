"""Continuous query synthesis: midpoint at the posterior mean, difference
along the principal covariance eigenvector, magnitude from a 1-D search.

For p = mu + r v1 and q = mu - r v1 the response score at a sample w reduces
to 4 r v1.(w - mu) / (sigma0 sqrt(2 (||w - mu||^2 + r^2)^2 + 8 r^2 (v1.(w-mu))^2)),
and r is chosen to minimize the mean binary entropy of the response over the
frozen posterior samples.
"""

import math
from dataclasses import dataclass

import numpy as np

from prefsynth.errors import DegeneratePosteriorError
from prefsynth.infogain import binary_entropy
from prefsynth.posterior import PosteriorState
from prefsynth.response import QueryPair, ResponseModel


@dataclass(frozen=True)
class SynthesizedQuery:
    pair: QueryPair
    r_tilde: float
    direction: np.ndarray  # unit principal eigenvector v1
    a_tilde: np.ndarray  # hyperplane normal 4 r v1


def _entropy_objective(state: PosteriorState, model: ResponseModel):
    s = state.samples - state.mean
    sn2 = np.sum(s**2, axis=1)
    proj = s @ state.eigvec
    link = model.link

    def objective(r):
        denom = model.sigma0 * np.sqrt(
            2.0 * (sn2 + r * r) ** 2 + 8.0 * r * r * proj**2
        )
        return float(binary_entropy(link.cdf(4.0 * r * proj / denom)).mean())

    return objective


def _golden_section(fun, lo, hi, tol):
    """Minimize a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def optimize_magnitude(state: PosteriorState, model: ResponseModel) -> float:
    """Optimal half-gap r~ by golden-section search on log r over
    [r0/100, 100 r0], r0 = sqrt(Tr(Sigma))."""
    r0 = math.sqrt(state.trace)
    if r0 == 0.0:
        raise DegeneratePosteriorError("posterior has zero trace; cannot synthesize")
    objective = _entropy_objective(state, model)
    t = _golden_section(
        lambda t: objective(math.exp(t)),
        math.log(r0) - math.log(100.0),
        math.log(r0) + math.log(100.0),
        tol=1e-4,
    )
    return math.exp(t)


def synthesize(state: PosteriorState, model: ResponseModel) -> SynthesizedQuery:
    """Most informative continuous pair for the current posterior."""
    r = optimize_magnitude(state, model)
    v1 = state.eigvec
    pair = QueryPair(state.mean + r * v1, state.mean - r * v1)
    return SynthesizedQuery(pair=pair, r_tilde=r, direction=v1, a_tilde=4.0 * r * v1)
