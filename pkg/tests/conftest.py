"""Shared fixtures: the solved/refined Newtonian eight, built once per session.

The pipeline (seed -> minimize -> shooting refinement -> reconstruction) takes
a couple of seconds; nearly every test module consumes some stage of it.
"""

import numpy as np
import pytest

from figure_eight import action, loops, refine
from figure_eight.dynamics import NEWTONIAN


@pytest.fixture(scope="session")
def newton_minimized():
    return action.minimize(loops.seed_eight(12.0, 0.3), NEWTONIAN)


@pytest.fixture(scope="session")
def eight_loop(newton_minimized):
    return newton_minimized.loop


@pytest.fixture(scope="session")
def refined(eight_loop):
    warm = refine.extract_unknowns(eight_loop)
    return refine.refine(warm, NEWTONIAN, 12.0)


@pytest.fixture(scope="session")
def full_orbit(refined):
    return refine.reconstruct_full_orbit(refined.trajectory)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
