"""Shared fixtures: moderate-size branches and ground states reused across
module tests.  The acceptance suite builds its own full-size objects so
its timings are self-contained."""

import pytest

from nlsball import (
    ProblemParams,
    ShootConfig,
    geometric_lambda_grid,
    solve_whole_space,
    trace,
)

P13 = ProblemParams(N=1, p=3.0)
P15 = ProblemParams(N=1, p=5.0)
P33 = ProblemParams(N=3, p=3.0)


@pytest.fixture(scope="session")
def cfg_fast():
    return ShootConfig(n_nodes=1025)


@pytest.fixture(scope="session")
def cfg_fine():
    return ShootConfig(n_nodes=2049)


@pytest.fixture(scope="session")
def branch_13(cfg_fast):
    lams = geometric_lambda_grid(P13, -2.0, 60.0, 40, sign=+1)
    return trace(P13, lams, +1, cfg_fast)


@pytest.fixture(scope="session")
def branch_15(cfg_fast):
    lams = geometric_lambda_grid(P15, -2.0, 60.0, 40, sign=+1)
    return trace(P15, lams, +1, cfg_fast)


@pytest.fixture(scope="session")
def branch_33(cfg_fast):
    lams = geometric_lambda_grid(P33, -5.0, 120.0, 45, sign=+1)
    return trace(P33, lams, +1, cfg_fast)


@pytest.fixture(scope="session")
def branch_defoc(cfg_fast):
    lams = geometric_lambda_grid(P13, -2.6, -800.0, 40, sign=-1)
    return trace(P13, lams, -1, cfg_fast)


@pytest.fixture(scope="session")
def ground_state_13(cfg_fine):
    return solve_whole_space(P13, 20.0, cfg_fine)


@pytest.fixture(scope="session")
def ground_state_15(cfg_fine):
    return solve_whole_space(P15, 20.0, cfg_fine)


@pytest.fixture(scope="session")
def ground_state_33(cfg_fine):
    return solve_whole_space(P33, 20.0, cfg_fine)
