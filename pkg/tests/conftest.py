"""Shared fixtures: the default experiment context is expensive (it builds
the ODE ladder over the mirrored window), so it is constructed once per
session and reused by every test that needs it."""

import numpy as np
import pytest

from zladder import harness


@pytest.fixture(scope="session")
def default_cfg():
    return harness.ExperimentConfig()


@pytest.fixture(scope="session")
def default_ctx(default_cfg):
    return harness.ExperimentContext(default_cfg)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
