import numpy as np
import pytest

from prefsynth.posterior import PosteriorState


def make_gaussian_state(mean, cov, n=10_000, seed=0) -> PosteriorState:
    """Posterior state backed by exact multivariate-normal samples, so tests
    can separate estimator behavior from MCMC noise."""
    rng = np.random.default_rng(seed)
    mean = np.asarray(mean, dtype=float)
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    samples = rng.multivariate_normal(mean, cov, size=n)
    return PosteriorState.from_samples(samples)


@pytest.fixture
def gaussian_state():
    return make_gaussian_state
