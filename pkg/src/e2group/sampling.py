"""Seeded generators of random realizable test inputs."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .geometry4d import EdgeLengths, cm_volume
from .symbols import TenJInput

#: Smallest accepted ``k! * volume / (mean edge length)^k`` for random simplices.
MIN_SHAPE = 0.05


def random_points(rng: np.random.Generator, labels=(1, 2, 3, 4, 5)) -> dict:
    return {v: rng.standard_normal(4) for v in labels}


def _shape(lengths: EdgeLengths, k: int) -> float:
    mean = np.mean(list(lengths.values()))
    return math.factorial(k) * cm_volume(k, lengths) / mean**k


def random_general_points(rng: np.random.Generator, labels=(1, 2, 3, 4, 5, 6), min_shape: float = MIN_SHAPE) -> dict:
    """Random points in R^4 whose every 5-point subset spans a not too flat 4-simplex."""
    while True:
        pts = random_points(rng, labels)
        lengths = EdgeLengths.from_points(pts)
        if all(_shape(lengths.restrict(sub), 4) >= min_shape for sub in itertools.combinations(labels, 5)):
            return pts


def random_lengths(rng: np.random.Generator, vertices=(1, 2, 3, 4, 5), min_shape: float = MIN_SHAPE) -> EdgeLengths:
    """Edge lengths of a random, not too flat Euclidean simplex on ``vertices``.

    Flatness is measured by ``k! * volume / (mean edge length)^k``.
    """
    k = len(vertices) - 1
    while True:
        lengths = EdgeLengths.from_points(random_points(rng, vertices))
        if _shape(lengths, k) >= min_shape:
            return lengths


def random_spins(rng: np.random.Generator, vertices=(1, 2, 3, 4, 5), smax: int = 3) -> dict:
    return {t: int(rng.integers(-smax, smax + 1)) for t in itertools.combinations(vertices, 3)}


def random_input(rng: np.random.Generator, smax: int = 3) -> TenJInput:
    lengths = random_lengths(rng)
    return TenJInput(lengths, random_spins(rng, lengths.vertices, smax))
