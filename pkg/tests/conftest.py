"""Shared fixtures.

The expensive objects (context, pairing table, Fock representation) are
session-scoped so the Gram sweeps are paid once for the whole suite.
"""

import math

import numpy as np
import pytest

from dskrein.fock import FockRep, one_particle_space
from dskrein.geometry import DsParams, DsPoint
from dskrein.krein import KreinContext, PairingTable
from dskrein.testfn import MARGIN_CELLS, ChartGrid, bump

N_TAU, N_THETA = 128, 96

# verdict lines collected by the acceptance tests, echoed after the run so
# they survive output capture
ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


def random_bumps(grid, count, rng, complex_amps=True):
    geom = grid.geom
    lim = min(-grid.tau[MARGIN_CELLS], grid.tau[-1 - MARGIN_CELLS]) - 0.02 * geom.R
    out = []
    for _ in range(count):
        w_tau = rng.uniform(0.45, 0.6) * geom.R
        w_theta = rng.uniform(1.0, 1.6)
        tau_c = rng.uniform(-(lim - w_tau), lim - w_tau)
        theta_c = rng.uniform(0.0, 2.0 * math.pi)
        amp = 1.0 + (rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.5, 0.5)
                     if complex_amps else rng.uniform(-0.5, 0.5))
        out.append(bump(DsPoint(tau_c, theta_c, geom), (w_tau, w_theta), amp, grid))
    return out


@pytest.fixture(scope="session")
def geom():
    return DsParams(1.0)


@pytest.fixture(scope="session")
def grid(geom):
    return ChartGrid(geom, N_TAU, N_THETA)


@pytest.fixture(scope="session")
def grid_half(grid):
    return grid.with_resolution(0.5)


@pytest.fixture(scope="session")
def ctx(grid):
    return KreinContext.build(grid)


@pytest.fixture(scope="session")
def basis12(grid):
    return random_bumps(grid, 12, np.random.default_rng(0))


@pytest.fixture(scope="session")
def table(ctx, basis12):
    return PairingTable.build(ctx, basis12)


@pytest.fixture(scope="session")
def space(ctx, grid):
    # a small basis keeps the truncated Fock space at a workable dimension
    funcs = random_bumps(grid, 4, np.random.default_rng(11))
    return one_particle_space(PairingTable.build(ctx, funcs))


@pytest.fixture(scope="session")
def frep(space):
    return FockRep(space, n_max=4)
