import itertools
import math

import numpy as np
import pytest

from e2group.geometry4d import EdgeLengths

ACOS_QUARTER = math.acos(0.25)
REGULAR_V = math.sqrt(5) / 4


def regular_lengths(scale=1.0, vertices=(1, 2, 3, 4, 5)):
    return EdgeLengths({e: scale for e in itertools.combinations(vertices, 2)})


def corner_points():
    return {1: np.zeros(4), **{i + 2: np.eye(4)[i] for i in range(4)}}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
