import numpy as np
import pytest

from semiflux.monitors import MonitorSuite, evaluate_trajectory
from semiflux.scenarios import make_setup
from semiflux.solver import run


@pytest.fixture(scope="session")
def bump_setup():
    # small, fast default used by many structural tests
    return make_setup("gaussian-bump", {"n_cells": 200, "t_end": 1.0})


@pytest.fixture(scope="session")
def bump_traj(bump_setup):
    return run(bump_setup.initial, bump_setup.profile, bump_setup.model,
               bump_setup.cfg, bump_setup.grid, record_every=20)


@pytest.fixture(scope="session")
def bump_report(bump_setup, bump_traj):
    return evaluate_trajectory(bump_traj, bump_setup.profile, MonitorSuite())


@pytest.fixture()
def rng():
    return np.random.default_rng(20260814)
