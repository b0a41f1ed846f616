from __future__ import annotations

import pytest
from hypothesis import settings

from robustsched.model import Instance, Scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def two_job():
    # job0: r in [0,2], p in [1,3]; job1: r in [0,4], p in [2,2]
    return Instance.from_bounds([(0, 2), (0, 4)], [(1, 3), (2, 2)], name="two")


@pytest.fixture
def fixed_pair():
    return Instance.from_bounds([(1, 1), (3, 3)], [(2, 2), (2, 2)], name="fixed_pair")


@pytest.fixture
def fixed_pair_scenario():
    return Scenario((1, 3), (2, 2))
