import math

import numpy as np
import pytest

from e2group.errors import GeometryError, MoveError
from e2group.geometry4d import EdgeLengths
from e2group.pachner import (
    MoveSpec,
    apply_move,
    available_moves,
    flatness_check,
    hexagon_residual,
    inverse_move,
    isomorphic,
    three_three_sides,
)
from e2group.sampling import random_general_points
from e2group.statesum import (
    Labeling,
    boundary_of_simplex,
    induced_signs,
    single_pent,
    weight,
)


def subdivided_pent():
    return apply_move(single_pent(), MoveSpec("1-5", (1, 2, 3, 4, 5), fresh=6))


def subdivided_sphere():
    return apply_move(boundary_of_simplex(), MoveSpec("1-5", (1, 2, 3, 4, 5), fresh=7))


def flipped_sphere():
    tri = subdivided_sphere()
    return apply_move(tri, available_moves(tri, "2-4")[0])


STARTS = {"1-5": single_pent, "2-4": subdivided_sphere, "3-3": flipped_sphere, "4-2": flipped_sphere, "5-1": subdivided_pent}


def test_one_five_on_single_pent():
    tri = subdivided_pent()
    assert len(tri.pents) == 5
    assert 6 in tri.vertices
    assert 6 not in {v for t in tri.boundary_tetrahedra for v in t}
    assert tri.boundary_tetrahedra == single_pent().boundary_tetrahedra


def test_moves_keep_closed_manifold():
    for make in STARTS.values():
        start = make()
        for kind in ("2-4", "3-3", "4-2"):
            for move in available_moves(start, kind):
                after = apply_move(start, move)
                assert after.is_closed == start.is_closed
                assert after.euler_characteristic() == start.euler_characteristic()


@pytest.mark.parametrize("kind, delta", [("3-3", 0), ("2-4", 2), ("1-5", 4), ("4-2", -2), ("5-1", -4)])
def test_pent_count_changes(kind, delta):
    start = STARTS[kind]()
    moves = available_moves(start, kind)
    assert moves, f"no {kind} move available"
    for move in moves:
        after = apply_move(start, move)
        assert len(after.pents) == len(start.pents) + delta


def test_three_three_swaps_interior_triangle():
    sides = three_three_sides((1, 2, 3, 4, 5, 6))
    tri_a, abc = sides["A"]
    tri_b, def_ = sides["B"]
    after = apply_move(tri_a, MoveSpec("3-3", abc))
    assert after == tri_b
    assert def_ in after.interior_triangles and abc not in after.triangles
    assert after.boundary_tetrahedra == tri_a.boundary_tetrahedra


def _boundary_signs(tri):
    out = {}
    for p, s in tri.pents.items():
        for tet, sign in induced_signs(p, s).items():
            if tri.is_boundary_tet(tet):
                out[tet] = sign
    return out


def test_boundary_orientation_preserved():
    start = subdivided_pent()
    for kind in ("1-5", "5-1"):
        for move in available_moves(start, kind):
            assert _boundary_signs(apply_move(start, move)) == _boundary_signs(start)


@pytest.mark.parametrize("kind", sorted(STARTS))
def test_round_trip_isomorphic(kind):
    start = STARTS[kind]()
    for move in available_moves(start, kind):
        after = apply_move(start, move)
        back = apply_move(after, inverse_move(start, move))
        assert isomorphic(back, start)
        assert back == start


def test_round_trip_on_closed_complex():
    tri = boundary_of_simplex()
    bigger = apply_move(tri, MoveSpec("1-5", (1, 2, 3, 4, 5), fresh=7))
    assert bigger.is_closed and bigger.euler_characteristic() == 2
    two_four = available_moves(bigger, "2-4")
    assert two_four
    after = apply_move(bigger, two_four[0])
    assert after.is_closed and after.euler_characteristic() == 2
    assert isomorphic(apply_move(after, inverse_move(bigger, two_four[0])), bigger)


def test_isomorphic_detects_difference():
    assert not isomorphic(single_pent(), subdivided_pent())
    relabeled = apply_move(single_pent(), MoveSpec("1-5", (1, 2, 3, 4, 5), fresh=99))
    assert isomorphic(relabeled, subdivided_pent())


def test_inapplicable_moves():
    tri = boundary_of_simplex()
    with pytest.raises(MoveError):
        apply_move(tri, MoveSpec("2-4", (1, 2, 3, 4)))
    with pytest.raises(MoveError):
        apply_move(tri, MoveSpec("3-3", (1, 2, 3)))
    with pytest.raises(MoveError):
        apply_move(tri, MoveSpec("1-5", (1, 2, 3, 4, 5), fresh=3))
    with pytest.raises(MoveError):
        apply_move(tri, MoveSpec("1-5", (1, 2, 3, 4, 7), fresh=8))
    with pytest.raises(MoveError):
        apply_move(single_pent(), MoveSpec("5-1", (1,)))
    with pytest.raises(MoveError):
        MoveSpec("2-4", (1, 2, 3))
    with pytest.raises(MoveError):
        MoveSpec("6-0", (1,))


def test_flatness_random_configurations():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        pts = random_general_points(rng, "abcdef")
        for side in ("A", "B"):
            worst = max(worst, abs(flatness_check(pts, side)))
    assert worst < 1e-9


def test_flatness_errors():
    rng = np.random.default_rng(0)
    pts = {v: rng.standard_normal(4) for v in range(1, 6)}
    pts[6] = pts[1].copy()
    with pytest.raises(GeometryError, match="coincide"):
        flatness_check(pts)
    with pytest.raises(GeometryError):
        flatness_check({v: rng.standard_normal(4) for v in range(1, 6)})
    with pytest.raises(GeometryError):
        flatness_check({v: rng.standard_normal(3) for v in range(1, 7)})
    with pytest.raises(GeometryError):
        flatness_check({v: rng.standard_normal(4) for v in range(1, 7)}, side="C")


def _flat_boundary(seed=7):
    rng = np.random.default_rng(seed)
    pts = random_general_points(rng)
    lengths = dict(EdgeLengths.from_points(pts))
    tri, interior = three_three_sides(range(1, 7))["A"]
    spins = {t: int(rng.integers(-2, 3)) for t in tri.triangles if t != interior}
    return lengths, spins


def test_hexagon_zero_cutoff():
    lengths, _ = _flat_boundary()
    rep = hexagon_residual(lengths, {}, 0)
    for name, (tri, interior) in three_three_sides(range(1, 7)).items():
        w = weight(tri, Labeling(lengths, {}))
        assert rep.partial_sums[name] == [w / (2 * math.pi)]
        assert w != 0
    assert rep.differences == [rep.partial_sums["A"][0] - rep.partial_sums["B"][0]]


def test_hexagon_partial_sums_and_symmetry():
    lengths, spins = _flat_boundary()
    rep = hexagon_residual(lengths, spins, 4)
    neg = hexagon_residual(lengths, {t: -s for t, s in spins.items()}, 4)
    assert len(rep.partial_sums["A"]) == 5 and len(rep.differences) == 5
    for name in ("A", "B"):
        assert np.allclose(rep.partial_sums[name], neg.partial_sums[name], rtol=1e-12, atol=0)


def test_hexagon_errors():
    lengths, spins = _flat_boundary()
    with pytest.raises(GeometryError):
        hexagon_residual(lengths, spins, -1)
    partial = {e: x for e, x in lengths.items() if e != (1, 2)}
    with pytest.raises(GeometryError, match="fifteen"):
        hexagon_residual(partial, spins, 1)
    bad = {**lengths, (1, 2): lengths[(1, 3)] + lengths[(2, 3)] + 1.0}
    with pytest.raises(GeometryError, match="triangle inequality"):
        hexagon_residual(bad, spins, 1)
