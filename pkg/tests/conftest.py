"""Shared fixtures: grids, quadrature rules, and a smooth random profile
factory with machine-resolved spectral tails."""

import math

import numpy as np
import pytest

from muskatsim import GridSpec, Profile, QuadratureRule, make_grid, synthesize_profile


@pytest.fixture(scope="session")
def grid128() -> GridSpec:
    return make_grid(128, 2.0 * math.pi)


@pytest.fixture(scope="session")
def grid256() -> GridSpec:
    return make_grid(256, 2.0 * math.pi)


@pytest.fixture(scope="session")
def grid512() -> GridSpec:
    return make_grid(512, 2.0 * math.pi)


@pytest.fixture(scope="session")
def rule256(grid256) -> QuadratureRule:
    return QuadratureRule.midpoint(grid256)


@pytest.fixture(scope="session")
def rule512(grid512) -> QuadratureRule:
    return QuadratureRule.midpoint(grid512)


def smooth_profile(grid: GridSpec, seed: int, amplitude: float = 1.0) -> Profile:
    """Random mean-zero profile with e^(-2|xi|) coefficient decay."""
    rng = np.random.RandomState(seed)
    mag = np.exp(-2.0 * np.abs(grid.frequencies))
    phase = rng.uniform(0.0, 2.0 * math.pi, grid.N)
    c = mag * np.exp(1j * phase)
    half = grid.N // 2
    c[half] = 0.0
    c[0] = 0.0
    c[1:half] = np.conj(c[half + 1:][::-1])
    f = synthesize_profile(grid, c)
    return Profile(grid, amplitude * f.values / np.max(np.abs(f.values)))
