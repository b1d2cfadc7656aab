"""Shared fixtures: the reference interaction and the three canonical solves."""

import numpy as np
import pytest

import latgas as lg

RHO = 0.23
LAM = 7.0
XI_CURVE = LAM * RHO * RHO


@pytest.fixture(scope="session")
def pot_a2():
    return lg.Potential.power_plateau(0.5, 10.0, periodic=True, d=1)


@pytest.fixture(scope="session")
def kernel256(pot_a2):
    return lg.cell_kernel(pot_a2, 256)


@pytest.fixture(scope="session")
def solve_on_curve(pot_a2, kernel256):
    return lg.solve_entropy(pot_a2, XI_CURVE, RHO, m=256, kernel=kernel256)


@pytest.fixture(scope="session")
def solve_below(pot_a2, kernel256):
    return lg.solve_entropy(pot_a2, XI_CURVE - 0.02, RHO, m=256, kernel=kernel256)


@pytest.fixture(scope="session")
def solve_above(pot_a2, kernel256):
    return lg.solve_entropy(pot_a2, XI_CURVE + 0.02, RHO, m=256, kernel=kernel256)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240214)
