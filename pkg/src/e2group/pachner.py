"""Pachner moves in four dimensions and flatness / hexagon diagnostics.

Every move is a bistellar flip: for disjoint vertex sets ``A`` and ``B`` with
``|A| + |B| = 6`` the star ``A * boundary(B)`` (the ``|B|`` pents
``A + B - {b}``) is replaced by ``boundary(A) * B`` (the ``|A|`` pents
``B + A - {a}``). The kind ``"p-q"`` has ``p = |B|`` old and ``q = |A|`` new pents.
Orientations come from the boundary of the 5-simplex ``A + B``: the old pents
must appear in it with one common sign, and the new ones get the opposite
sign, so the boundary of the region is preserved.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import GeometryError, MoveError
from .geometry4d import EdgeLengths, triangle_area
from .so4 import wrap_angle
from .statesum import (
    Labeling,
    Triangulation4,
    canonical,
    deficit_angles,
    geometric_orientations,
    oriented_sign,
    weight,
)

MOVE_KINDS = {"1-5": 5, "2-4": 4, "3-3": 3, "4-2": 2, "5-1": 1}


@dataclass(frozen=True)
class MoveSpec:
    """A move of the given kind at ``target``.

    ``target`` is the face ``A`` that disappears: a pent for 1-5, a
    tetrahedron for 2-4, a triangle for 3-3, an edge for 4-2 and a vertex for
    5-1. A 1-5 move needs ``fresh``, the label of the new vertex.
    """

    kind: str
    target: tuple
    fresh: object = None

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise MoveError(f"unknown move kind {self.kind!r}; expected one of {sorted(MOVE_KINDS)}")
        target = (self.target,) if not isinstance(self.target, (tuple, list)) else tuple(self.target)
        if len(target) != MOVE_KINDS[self.kind]:
            raise MoveError(f"a {self.kind} move targets a face with {MOVE_KINDS[self.kind]} vertices")
        object.__setattr__(self, "target", canonical(target))


def _simplex_boundary(vertices: Sequence) -> dict:
    """Signs of the 4-faces of the 5-simplex ``[vertices]`` in its boundary."""
    out = {}
    for i in range(len(vertices)):
        face = tuple(vertices[:i]) + tuple(vertices[i + 1 :])
        key, sign = oriented_sign(face, (-1) ** i)
        out[key] = sign
    return out


def _link(tri: Triangulation4, A: tuple) -> tuple[list, tuple]:
    star = tri.pents_containing(A)
    B = canonical({v for p in star for v in p} - set(A))
    return star, B


def apply_move(tri: Triangulation4, move: MoveSpec) -> Triangulation4:
    A = move.target
    vertices = list(tri.vertices)
    if move.kind == "1-5":
        if A not in tri.pents:
            raise MoveError(f"{A} is not a pent")
        if move.fresh is None or move.fresh in tri.vertices:
            raise MoveError("a 1-5 move needs a fresh vertex label")
        B = (move.fresh,)
        star = [A]
        vertices.append(move.fresh)
    else:
        star, B = _link(tri, A)
        if len(B) != 6 - len(A):
            raise MoveError(f"the link of {A} has {len(B)} vertices, not {6 - len(A)}")
        expected = {canonical((set(A) | set(B)) - {b}) for b in B}
        if set(star) != expected:
            raise MoveError(f"the star of {A} is not the {move.kind} configuration")
        if len(B) < 5 and tri.pents_containing(B):
            raise MoveError(f"the face {B} already exists; the move would create a duplicate")
        if len(B) == 5 and B in tri.pents:
            raise MoveError(f"the pent {B} already exists")
    if len(A) == 1:
        vertices.remove(A[0])
    big = _simplex_boundary(canonical(set(A) | set(B)))
    relative = {big[p] * tri.pents[p] for p in star}
    if len(relative) != 1:
        raise MoveError(f"the pents around {A} are not coherently oriented")
    orient = relative.pop()
    pents = {p: s for p, s in tri.pents.items() if p not in star}
    for a in A:
        p = canonical((set(A) | set(B)) - {a})
        pents[p] = -orient * big[p]
    return Triangulation4(tuple(vertices), pents)


def available_moves(tri: Triangulation4, kind: str) -> list[MoveSpec]:
    """All applicable moves of ``kind`` (1-5 moves use a fresh integer label)."""
    size = MOVE_KINDS[kind]
    fresh = None
    if kind == "1-5":
        fresh = 1 + max((v for v in tri.vertices if isinstance(v, int)), default=0)
    out = []
    for face in tri.faces(size) if size > 1 else [(v,) for v in tri.vertices]:
        move = MoveSpec(kind, face, fresh)
        try:
            apply_move(tri, move)
        except MoveError:
            continue
        out.append(move)
    return out


def inverse_move(tri_before: Triangulation4, move: MoveSpec) -> MoveSpec:
    """The move undoing ``move`` (applied to ``tri_before``)."""
    A = move.target
    if move.kind == "1-5":
        return MoveSpec("5-1", (move.fresh,))
    _, B = _link(tri_before, A)
    if move.kind == "5-1":
        return MoveSpec("1-5", B, fresh=A[0])
    return MoveSpec(f"{len(A)}-{len(B)}", B)


def incidence_graph(tri: Triangulation4) -> nx.Graph:
    g = nx.Graph()
    for v in tri.vertices:
        g.add_node(("v", v), kind="vertex")
    for p in tri.pents:
        g.add_node(("p", p), kind="pent")
        g.add_edges_from((("p", p), ("v", v)) for v in p)
    return g


def isomorphic(a: Triangulation4, b: Triangulation4) -> bool:
    """Combinatorial isomorphism of the two complexes (orientations ignored)."""
    if a.counts() != b.counts() or len(a.vertices) != len(b.vertices):
        return False
    return nx.is_isomorphic(
        incidence_graph(a), incidence_graph(b), node_match=lambda x, y: x["kind"] == y["kind"]
    )


# ---------------------------------------------------------------------------
# Flat 3-3 configurations


def three_three_sides(labels: Sequence) -> dict:
    """The two sides of the 3-3 move on six labels ``a..f``.

    Side ``"A"`` has the interior triangle ``abc`` and side ``"B"`` the
    interior triangle ``def``; both are oriented so that they share the same
    boundary.
    """
    labels = tuple(labels)
    if len(labels) != 6 or len(set(labels)) != 6:
        raise GeometryError("a 3-3 configuration needs six distinct labels")
    big = _simplex_boundary(labels)
    abc, def_ = canonical(labels[:3]), canonical(labels[3:])
    side_a = {p: s for p, s in big.items() if set(abc) <= set(p)}
    side_b = {p: -s for p, s in big.items() if set(def_) <= set(p)}
    return {
        "A": (Triangulation4(labels, side_a), abc),
        "B": (Triangulation4(labels, side_b), def_),
    }


def flatness_check(points: Mapping, side: str = "A") -> float:
    """Deficit angle of the interior triangle of one side of a flat 3-3 move.

    Each pent's dihedral angle is counted with the sign of its orientation in
    the embedding; the result is reduced to (-pi, pi].
    """
    labels = tuple(points)
    if len(labels) != 6:
        raise GeometryError(f"need six labelled points, got {len(labels)}")
    pts = {v: np.asarray(points[v], float) for v in labels}
    for v in labels:
        if pts[v].shape != (4,):
            raise GeometryError(f"point {v} is not in R^4")
    for i, u in enumerate(labels):
        for v in labels[i + 1 :]:
            if np.linalg.norm(pts[u] - pts[v]) < 1e-12:
                raise GeometryError(f"points {u} and {v} coincide")
    if side not in ("A", "B"):
        raise GeometryError(f"side must be 'A' or 'B', got {side!r}")
    tri, interior = three_three_sides(labels)[side]
    eta = geometric_orientations(tri, pts)
    lab = Labeling.from_points(pts)
    return wrap_angle(deficit_angles(tri, lab, eta)[interior])


# ---------------------------------------------------------------------------
# Truncated hexagon probe


@dataclass
class HexagonReport:
    cutoff: int
    interior: dict
    partial_sums: dict = field(default_factory=dict)

    @property
    def differences(self) -> list[float]:
        return [a - b for a, b in zip(self.partial_sums["A"], self.partial_sums["B"])]


def hexagon_residual(lengths: Mapping, spins: Mapping, cutoff: int, labels: Sequence | None = None) -> HexagonReport:
    """Both sides of the 3-3 move summed over the interior-triangle spin.

    ``lengths`` must cover all 15 edges of the six vertices (the interior
    triangle's edges are shared by both sides' boundaries); ``spins`` gives
    the spins of the boundary triangles. For each side, the partial sum up to
    ``|s| <= S`` of ``(1/2pi) * weight`` is recorded for every ``S`` up to
    ``cutoff``; the weight includes the interior triangle's factor ``2A``.
    No cancellation between the sides is assumed.
    """
    if cutoff < 0:
        raise GeometryError("spin cutoff must be non-negative")
    labels = canonical({v for e in lengths for v in e}) if labels is None else tuple(labels)
    if len(labels) != 6:
        raise GeometryError("a 3-3 configuration has six vertices")
    el = EdgeLengths(lengths)
    if not el.is_complete(labels):
        raise GeometryError("lengths must cover all fifteen edges")
    sides = three_three_sides(labels)
    report = HexagonReport(cutoff, {k: v[1] for k, v in sides.items()})
    for name, (tri, interior) in sides.items():
        a, b, c = interior
        if triangle_area(el[a, b], el[b, c], el[a, c]) <= 0:
            raise GeometryError(f"interior triangle {interior} violates the triangle inequality")
        base = {canonical(t): int(s) for t, s in spins.items() if canonical(t) != interior}
        terms = {
            s: weight(tri, Labeling(dict(el), {**base, interior: s})) / (2 * math.pi)
            for s in range(-cutoff, cutoff + 1)
        }
        sums, running = [], terms[0]
        sums.append(running)
        for S in range(1, cutoff + 1):
            running += terms[S] + terms[-S]
            sums.append(running)
        report.partial_sums[name] = sums
    return report
