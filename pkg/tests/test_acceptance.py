"""Acceptance criteria 1-8, each with its time budget."""

import itertools
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from conftest import ACOS_QUARTER, regular_lengths
from scipy.spatial.transform import Rotation as R3

from e2group.geometry4d import (
    EdgeLengths,
    dihedral_angles,
    embed,
    simplex_V,
    triangle_area,
)
from e2group.measures import (
    EXTERIOR,
    KAPPA_EXACT,
    kappa_mc,
    sphere_volume_mc,
    triangle_measure_mc,
)
from e2group.pachner import flatness_check
from e2group.sampling import random_general_points, random_input
from e2group.so4 import Rotation, embed_so3, haar_sample
from e2group.statesum import (
    Labeling,
    boundary_of_simplex,
    boundary_sign,
    cosine_weight,
    weight,
)
from e2group.symbols import TenJInput, ten_j, ten_j_from_oracle, verify_lemma

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
MC_SAMPLES = 1_000_000


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


# 1 -------------------------------------------------------------------------


def test_criterion_1_geometry():
    rng = np.random.default_rng(1)
    with Budget(1.0):
        for _ in range(200):
            a, b, c = rng.uniform(0.1, 10, 3)
            s = 0.5 * (a + b + c)
            heron = s * (s - a) * (s - b) * (s - c)
            if heron > 1e-6:
                assert triangle_area(a, b, c) == pytest.approx(math.sqrt(heron), rel=1e-10)
        for _ in range(100):
            pts = {v: rng.standard_normal(4) for v in range(1, 6)}
            det = abs(np.linalg.det(np.array([pts[v] - pts[1] for v in range(2, 6)])))
            assert simplex_V(EdgeLengths.from_points(pts)) == pytest.approx(det, rel=1e-10)
        for phi in dihedral_angles(embed(regular_lengths())).values():
            assert phi == pytest.approx(ACOS_QUARTER, rel=1e-10)


# 2 -------------------------------------------------------------------------


def test_criterion_2_angle_lemma():
    rng = np.random.default_rng(2)
    worst = 0.0
    with Budget(30.0):
        for _ in range(100):
            inp = random_input(rng)
            for eta in (1, -1):
                rep = verify_lemma(inp, eta)
                assert len({t.epsilon for t in rep.triangles.values()}) == 1
                assert rep.epsilon == eta
                worst = max(worst, rep.max_residual)
    assert worst < 1e-8


# 3 -------------------------------------------------------------------------


def test_criterion_3_closed_form_matches_oracle():
    rng = np.random.default_rng(3)
    worst = 0.0
    with Budget(60.0):
        for _ in range(100):
            inp = random_input(rng, smax=3)
            worst = max(worst, abs(ten_j(inp).value - ten_j_from_oracle(inp)))
    assert worst < 1e-8


# 4 -------------------------------------------------------------------------


def test_criterion_4_gauge_invariance():
    rng = np.random.default_rng(4)
    with Budget(30.0):
        for _ in range(20):
            inp = random_input(rng)
            base = ten_j_from_oracle(inp)
            assert abs(ten_j_from_oracle(inp, rotation=haar_sample(rng)) - base) < 1e-10
            chart = ten_j_from_oracle(inp, threshold=rng.uniform(0.1, 0.9), twist=haar_sample(rng))
            assert abs(chart - base) < 1e-10
            u = Rotation.from_matrix(embed_so3(R3.random(random_state=int(rng.integers(2**31))).as_matrix()))
            assert abs(ten_j_from_oracle(inp, reference_rotation=u) - base) < 1e-10


# 5 -------------------------------------------------------------------------


@pytest.mark.parametrize("sides", [(1.0, 1.0, 1.0), (3.0, 4.0, 5.0), (0.7, 1.2, 1.6)])
def test_criterion_5_triangle_measure(sides):
    with Budget(60.0):
        est = triangle_measure_mc(*sides, samples=MC_SAMPLES, rng=np.random.default_rng(51))
    assert est.expected == pytest.approx(2 * triangle_area(*sides))
    assert abs(est.value / est.expected - 1) < 0.02


@pytest.mark.parametrize("l", [1.0, 2.0])
def test_criterion_5_sphere_volume(l):
    with Budget(60.0):
        est = sphere_volume_mc(l, samples=MC_SAMPLES, rng=np.random.default_rng(52))
    assert abs(est.value / (math.pi * l**3) - 1) < 0.01


def test_criterion_5_kappa():
    ext = dict(zip(EXTERIOR, [1.0, 1.1, 0.95, 1.05, 1.0]))
    with Budget(120.0):
        est = kappa_mc(ext, samples=MC_SAMPLES, rng=np.random.default_rng(53))
    print(f"kappa = {est.value:.6g} +- {est.error:.2g} (closed form {KAPPA_EXACT:.6g})")
    assert est.error / est.value < 0.05
    assert abs(est.value / KAPPA_EXACT - 1) < 0.05


# 6 -------------------------------------------------------------------------


def test_criterion_6_flatness():
    rng = np.random.default_rng(6)
    worst = 0.0
    with Budget(10.0):
        for _ in range(100):
            pts = random_general_points(rng, "abcdef")
            for side in ("A", "B"):
                worst = max(worst, abs(flatness_check(pts, side)))
    assert worst < 1e-9


# 7 -------------------------------------------------------------------------


def test_criterion_7_state_sum():
    rng = np.random.default_rng(7)
    tri = boundary_of_simplex()
    with Budget(30.0):
        assert tri.counts() == (6, 15, 20, 15, 6)
        for _ in range(5):
            lengths = EdgeLengths.from_points(random_general_points(rng))
            lab = Labeling(dict(lengths), {})
            areas = math.prod(
                2 * triangle_area(lengths[a, b], lengths[b, c], lengths[a, c])
                for a, b, c in itertools.combinations(range(1, 7), 3)
            )
            vols = math.prod(
                simplex_V(EdgeLengths({e: lengths[e] for e in itertools.combinations(p, 2)}))
                for p in itertools.combinations(range(1, 7), 5)
            )
            assert weight(tri, lab) == pytest.approx(areas / vols, rel=1e-10)
        for _ in range(50):
            lengths = EdgeLengths.from_points(random_general_points(rng))
            spins = {t: int(rng.integers(-3, 4)) for t in tri.triangles}
            lab = Labeling(dict(lengths), spins)
            w, c = weight(tri, lab), cosine_weight(tri, lab)
            assert boundary_sign(tri, lab) == 1
            assert w == pytest.approx(c, rel=1e-10, abs=1e-12 * abs(c))


def test_criterion_7_single_pent_is_ten_j():
    from e2group.statesum import regular_labeling, single_pent

    tri = single_pent()
    lab = regular_labeling(tri)
    assert weight(tri, lab) == ten_j(TenJInput(regular_lengths())).value


# 8 -------------------------------------------------------------------------

UNIT = ",".join(["1"] * 10)
COMMANDS = {
    "tenj": ["tenj", "--lengths", "1,1.1,0.9,1,1.05,1,0.95,1,1.1,1", "--spins", "1,-2,0,3,1,0,0,-1,2,1", "--oracle"],
    "verify-lemma": ["verify", "lemma", "10", "--seed", "5"],
    "verify-gauge": ["verify", "gauge", "5", "--seed", "5", "--format", "csv"],
    "verify-flatness": ["verify", "flatness", "20", "--seed", "5"],
    "verify-measure": ["verify", "measure", "2", "--seed", "5", "--samples", "20000"],
    "weight": ["weight", str(DATA / "boundary_5simplex.tri"), "--format", "csv"],
    "scan": ["scan", str(DATA / "single_pent.tri"), "--to", "6"],
    "move": ["move", str(DATA / "boundary_5simplex.tri"), "--kind", "1-5", "--target", "1,2,3,4,5", "--fresh", "7"],
    "partition": ["partition", str(DATA / "boundary_5simplex.tri"), "--samples", "40", "--seed", "9", "--cutoff-spin", "1"],
}


def _run_cli(args, hashseed, cwd):
    env = {**os.environ, "PYTHONHASHSEED": str(hashseed)}
    proc = subprocess.run(
        [sys.executable, "-m", "e2group.cli", *args], capture_output=True, env=env, cwd=cwd, check=False
    )
    return proc.returncode, proc.stdout, proc.stderr


@pytest.mark.parametrize("name", sorted(COMMANDS))
def test_criterion_8_determinism(name, tmp_path):
    first = _run_cli(COMMANDS[name], 1, tmp_path)
    second = _run_cli(COMMANDS[name], 2, tmp_path)
    assert first[0] == 0, first[2].decode()
    assert first == second


def test_criterion_8_determinism_files(tmp_path):
    outputs = []
    for hashseed in (1, 2):
        d = tmp_path / str(hashseed)
        d.mkdir()
        code, _, err = _run_cli(["scan", str(DATA / "single_pent.tri"), "--to", "5", "-o", "s.csv", "--plot", "s.png"], hashseed, d)
        assert code == 0, err.decode()
        outputs.append(((d / "s.csv").read_bytes(), (d / "s.png").read_bytes()))
    assert outputs[0] == outputs[1]
