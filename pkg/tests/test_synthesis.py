import math

import numpy as np
import pytest

from prefsynth.errors import DegeneratePosteriorError
from prefsynth.infogain import mutual_information
from prefsynth.posterior import PosteriorState
from prefsynth.response import ResponseModel
from prefsynth.synthesis import _entropy_objective, optimize_magnitude, synthesize

from conftest import make_gaussian_state


def test_midpoint_and_gap_structure():
    state = make_gaussian_state(np.array([0.5, -1.0]), np.eye(2), n=5000, seed=0)
    model = ResponseModel(sigma0=0.1)
    synth = synthesize(state, model)
    mid = 0.5 * (synth.pair.p + synth.pair.q)
    assert np.max(np.abs(mid - state.mean)) < 1e-10
    assert np.allclose(synth.pair.p - synth.pair.q, 2.0 * synth.r_tilde * synth.direction)
    assert np.allclose(synth.a_tilde, 2.0 * (synth.pair.p - synth.pair.q))


def test_magnitude_close_to_posterior_scale():
    state = make_gaussian_state(np.zeros(2), np.eye(2), n=20_000, seed=1)
    model = ResponseModel(sigma0=0.1)
    r = optimize_magnitude(state, model)
    r0 = math.sqrt(state.trace)
    assert r0 / 3.0 < r < 3.0 * r0


def test_magnitude_matches_grid_scan():
    model = ResponseModel(sigma0=0.1)
    for seed in range(5):
        state = make_gaussian_state(np.zeros(2), np.eye(2), n=4000, seed=seed)
        objective = _entropy_objective(state, model)
        grid = np.exp(np.linspace(math.log(0.01), math.log(100.0), 2000))
        grid_best = grid[int(np.argmin([objective(r) for r in grid]))]
        r = optimize_magnitude(state, model)
        assert abs(r - grid_best) <= 0.01 * grid_best


def test_magnitude_scale_equivariance():
    model = ResponseModel(sigma0=0.1)
    base = make_gaussian_state(np.zeros(2), np.eye(2), n=8000, seed=3)
    r1 = optimize_magnitude(base, model)
    scaled = PosteriorState.from_samples(2.5 * base.samples)
    r2 = optimize_magnitude(scaled, model)
    assert abs(r2 - 2.5 * r1) <= 0.01 * 2.5 * r1


def test_direction_is_principal_axis():
    state = make_gaussian_state(np.zeros(2), np.diag([4.0, 1.0]), n=100_000, seed=4)
    model = ResponseModel(sigma0=0.1)
    synth = synthesize(state, model)
    diff = synth.pair.p - synth.pair.q
    cos = abs(diff[0]) / np.linalg.norm(diff)
    assert cos > 0.999


def test_synthesized_pair_is_equiprobable():
    state = make_gaussian_state(np.zeros(2), np.diag([4.0, 1.0]), n=100_000, seed=5)
    model = ResponseModel(sigma0=0.1)
    synth = synthesize(state, model)
    est = mutual_information(state, model, synth.pair)
    assert abs(est.pi - 0.5) <= 0.01


def test_degenerate_posterior_rejected():
    state = PosteriorState.from_samples(np.tile([1.0, 2.0], (10, 1)))
    with pytest.raises(DegeneratePosteriorError):
        optimize_magnitude(state, ResponseModel(sigma0=0.1))
