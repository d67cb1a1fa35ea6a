"""The 10j 2-symbol: closed form and the rotation-trace oracle.

The closed form is ``(-1)^S cos(sum_t s_t phi_t) / V`` with ``S`` the total
spin. The oracle rebuilds the same number from group data: it embeds the
4-simplex, aligns every boundary tetrahedron with its reference tetrahedron,
aligns every triangle with its reference triangle, and multiplies the phase
cocycles of the resulting rotations around each triangle.

Vertex labels of a 4-simplex are taken in ascending order as 1..5. The
tetrahedron opposite vertex ``i`` has boundary sign +1 when ``(i, rest...)``
is an even arrangement of the vertices; those tetrahedra align against the
reference tetrahedron, the others against its flip by ``u1(pi)``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, LemmaViolationError, NotInSubgroupError
from .geometry4d import (
    EdgeLengths,
    Embedding,
    dihedral_angles,
    embed,
    reference_tetrahedron,
    reference_triangle,
    simplex_V,
)
from .so4 import (
    PhaseCocycle,
    Rotation,
    align_tetrahedron,
    align_triangle,
    compose,
    permutation_parity,
    sigma_rotation,
    u1,
    u1_angle_of,
    wrap_angle,
)

#: Tolerance on U(1) membership of the triangle holonomies.
HOLONOMY_TOL = 1e-6
#: Tolerance for the angle lemma and the a-rotation plane check.
LEMMA_TOL = 1e-6


@dataclass(frozen=True)
class TenJInput:
    """Ten edge lengths and ten triangle spins of one 4-simplex."""

    lengths: EdgeLengths
    spins: Mapping[tuple, int] = field(default_factory=dict)

    def __post_init__(self):
        lengths = self.lengths if isinstance(self.lengths, EdgeLengths) else EdgeLengths(self.lengths)
        vertices = lengths.vertices
        if len(vertices) != 5 or not lengths.is_complete():
            raise GeometryError("a 4-simplex needs lengths for all ten edges of five vertices")
        spins = {}
        for tri, s in dict(self.spins).items():
            key = tuple(sorted(tri))
            if len(set(key)) != 3 or not set(key) <= set(vertices):
                raise GeometryError(f"{tri} is not a triangle of the simplex")
            if int(s) != s:
                raise GeometryError(f"spin on {key} is not an integer: {s!r}")
            spins[key] = int(s)
        for tri in itertools.combinations(vertices, 3):
            spins.setdefault(tri, 0)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "spins", spins)

    @classmethod
    def from_values(cls, lengths: Sequence[float], spins: Sequence[int] = (0,) * 10, vertices=(1, 2, 3, 4, 5)):
        """Lengths and spins listed in lexicographic edge / triangle order."""
        vertices = tuple(sorted(vertices))
        if len(spins) != 10:
            raise GeometryError(f"expected 10 spins, got {len(spins)}")
        tris = list(itertools.combinations(vertices, 3))
        return cls(EdgeLengths.from_values(lengths, vertices), dict(zip(tris, spins)))

    @property
    def vertices(self) -> tuple:
        return self.lengths.vertices

    @property
    def triangles(self) -> list[tuple]:
        return list(itertools.combinations(self.vertices, 3))

    @property
    def total_spin(self) -> int:
        return sum(self.spins.values())

    def with_spins(self, spins: Mapping[tuple, int]) -> TenJInput:
        return TenJInput(self.lengths, spins)

    def negated(self) -> TenJInput:
        return TenJInput(self.lengths, {t: -s for t, s in self.spins.items()})


@dataclass(frozen=True)
class TenJResult:
    value: float
    V: float
    dihedrals: dict
    sign: int

    def recompute(self, spins: Mapping[tuple, int]) -> float:
        phase = sum(spins[t] * phi for t, phi in self.dihedrals.items())
        return self.sign * math.cos(phase) / self.V


def spin_sign(total: int) -> int:
    return -1 if total % 2 else 1


def ten_j(inp: TenJInput) -> TenJResult:
    """Closed-form 10j 2-symbol.

    Raises :class:`~e2group.errors.DegenerateSimplexError` for flat or
    non-realizable simplices.
    """
    V = simplex_V(inp.lengths)
    phis = dihedral_angles(embed(inp.lengths, 1))
    sign = spin_sign(inp.total_spin)
    phase = sum(inp.spins[t] * phis[t] for t in inp.triangles)
    return TenJResult(sign * math.cos(phase) / V, V, phis, sign)


# ---------------------------------------------------------------------------
# Alignment data


def boundary_sign(vertices: Sequence, i) -> int:
    """+1 if the tetrahedron opposite ``i`` carries the induced orientation
    in ascending order, -1 otherwise."""
    rest = [v for v in vertices if v != i]
    return permutation_parity([i] + rest)


def triangle_vectors(points: Mapping, tri: Sequence) -> np.ndarray:
    """Edge vectors ``(x, y, z)`` = (b - a, c - b, c - a) of the triangle (a, b, c)."""
    a, b, c = (np.asarray(points[v]) for v in tri)
    return np.array([b - a, c - b, c - a])


def reference_triangle_vectors(lengths: EdgeLengths, tri: Sequence) -> np.ndarray:
    a, b, c = tri
    x0, z0 = reference_triangle(lengths[a, b], lengths[b, c], lengths[a, c])
    return np.array([x0, z0 - x0, z0])


@dataclass
class Alignment:
    """Group data of one embedded 4-simplex.

    ``g[i]`` maps the (possibly flipped) reference of the tetrahedron opposite
    ``i`` onto the embedded one; ``k[i, t]`` maps the reference triangle of
    ``t`` onto its image inside that reference tetrahedron.
    """

    embedding: Embedding
    references: dict
    g: dict
    k: dict
    flipped: dict

    def frame(self, i, tri) -> Rotation:
        return compose(self.g[i], self.k[i, tri])


def align_simplex(
    lengths: EdgeLengths,
    orientation: int,
    *,
    rotation: Rotation | None = None,
    reference_rotation: Rotation | None = None,
    flip: Iterable = (),
) -> Alignment:
    """Embed the simplex with the given orientation and compute ``g`` and ``k``.

    ``rotation`` moves the whole embedding, ``reference_rotation`` (an SO(3)
    element) moves every reference tetrahedron, and tetrahedra listed in
    ``flip`` use the opposite reference from their default one.
    """
    vertices = lengths.vertices
    emb = embed(lengths, orientation)
    if rotation is not None:
        emb = emb.transformed(rotation.matrix())
    flip = set(flip)
    h_pi = u1(math.pi).matrix()
    refs, gs, ks, flipped = {}, {}, {}, {}
    for i in vertices:
        tet = tuple(v for v in vertices if v != i)
        ref = reference_tetrahedron(lengths.restrict(tet))
        if reference_rotation is not None:
            ref = ref.transformed(reference_rotation.matrix())
        is_flipped = (boundary_sign(vertices, i) < 0) != (i in flip)
        if is_flipped:
            ref = ref.transformed(h_pi)
        refs[i] = ref
        flipped[i] = is_flipped
        gs[i] = align_tetrahedron(ref, np.array([emb[v] for v in tet]))
        ref_pts = dict(zip(ref.labels, ref.points))
        for tri in itertools.combinations(tet, 3):
            ks[i, tri] = align_triangle(reference_triangle_vectors(lengths, tri), triangle_vectors(ref_pts, tri))
    return Alignment(emb, refs, gs, ks, flipped)


def ordered_pair(vertices: Sequence, tri: tuple) -> tuple:
    """The two tetrahedra sharing ``tri`` as ``(i, j)`` with (i, j, tri) even."""
    i, j = (v for v in vertices if v not in tri)
    if permutation_parity((i, j) + tuple(tri)) < 0:
        i, j = j, i
    return i, j


def holonomy(al: Alignment, vertices: Sequence, tri: tuple) -> Rotation:
    """``h = G_j^-1 G_i`` for the ordered pair (i, j) of tetrahedra at ``tri``."""
    i, j = ordered_pair(vertices, tri)
    return compose(al.frame(j, tri).inverse(), al.frame(i, tri))


def trace_oracle(
    inp: TenJInput,
    orientation: int,
    *,
    threshold: float = 0.5,
    twist: Rotation | None = None,
    rotation: Rotation | None = None,
    reference_rotation: Rotation | None = None,
    flip: Iterable = (),
) -> complex:
    """Trace of the product of the five normalized 2-intertwiners at one
    embedded pentagon of orientation ``orientation``.

    Every triangle contributes ``Phi^s(G_i) / Phi^s(G_j)``; the cocycle is
    evaluated directly so the result is independent of the section only if
    each ``G_j^-1 G_i`` really lies in U(1), which is checked.
    """
    vertices = inp.vertices
    al = align_simplex(
        inp.lengths, orientation, rotation=rotation, reference_rotation=reference_rotation, flip=flip
    )
    total = 1.0 + 0.0j
    for tri in inp.triangles:
        s = inp.spins[tri]
        i, j = ordered_pair(vertices, tri)
        Gi, Gj = al.frame(i, tri), al.frame(j, tri)
        try:
            u1_angle_of(compose(Gj.inverse(), Gi), HOLONOMY_TOL)
        except NotInSubgroupError as exc:
            raise LemmaViolationError(f"holonomy at {tri} is not in U(1): {exc}") from exc
        if s == 0:
            continue
        phi = PhaseCocycle(s, threshold, twist)
        total *= phi(Gi) * phi(Gj).conjugate()
    return total


def orientation_sum(inp: TenJInput, **kwargs) -> complex:
    """``(1/V) * sum over both orientations`` of the trace: twice the symbol."""
    V = simplex_V(inp.lengths)
    return sum(trace_oracle(inp, eta, **kwargs) for eta in (1, -1)) / V


def ten_j_from_oracle(inp: TenJInput, **kwargs) -> float:
    """The 10j symbol rebuilt from the rotation trace.

    The two orientation orbits each carry ``exp(+-i sum s phi)``; their sum is
    twice the cosine, so it is halved here to compare with :func:`ten_j`.
    """
    total = orientation_sum(inp, **kwargs)
    if abs(total.imag) > 1e-9 * max(abs(total), 1.0):
        raise LemmaViolationError(f"orientation sum is not real: {total}")
    return 0.5 * total.real


# ---------------------------------------------------------------------------
# Angle lemma


@dataclass
class TriangleAngles:
    xi: float
    phi: float
    epsilon: int
    residual: float


@dataclass
class ARotation:
    tetrahedron: object
    order: tuple
    angle: float
    plane_residual: float
    tetra_dihedral: float


@dataclass
class LemmaReport:
    orientation: int
    triangles: dict
    epsilon: int
    max_residual: float
    sigma_epsilon: int
    sigma_max_residual: float
    a_rotations: list
    max_a_residual: float
    max_a_angle_error: float

    @property
    def ok(self) -> bool:
        return max(self.max_residual, self.sigma_max_residual, self.max_a_residual) < LEMMA_TOL


def _best_epsilon(xis: Mapping, phis: Mapping) -> tuple[int, float, dict]:
    best = None
    for eps in (1, -1):
        res = {t: abs(wrap_angle(xis[t] - math.pi - eps * phis[t])) for t in xis}
        worst = max(res.values())
        if best is None or worst < best[1]:
            best = (eps, worst, res)
    return best


def _tetra_dihedral(ref: Embedding, i, j, k, l) -> float:
    """3D dihedral angle of a tetrahedron at edge ij between faces ijk and ijl."""
    e = ref[j] - ref[i]
    e = e / np.linalg.norm(e)
    u = ref[k] - ref[i]
    v = ref[l] - ref[i]
    u = u - (u @ e) * e
    v = v - (v @ e) * e
    return math.acos(float(np.clip(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)), -1.0, 1.0)))


def verify_lemma(inp: TenJInput, orientation: int = 1, tol: float = LEMMA_TOL) -> LemmaReport:
    """Check ``xi_t = pi + eps * phi_t (mod 2 pi)`` with one global ``eps``.

    ``xi_t`` is extracted twice: from ``G_j^-1 G_i`` (the convention of the
    trace) and from the re-placed holonomy ``sigma^-1 G_l^-1 G_m sigma`` with
    (i, j, k, l, m) even. The a-rotations
    ``sigma_ijk^-1 k_ijk^-1 k_ijl sigma_ijl`` of every tetrahedron must fix
    the (e1, e4) plane; their angle is compared with the tetrahedron's own
    dihedral angle at edge ij.
    """
    vertices = inp.vertices
    al = align_simplex(inp.lengths, orientation)
    phis = dihedral_angles(al.embedding)

    xis, xis_sigma = {}, {}
    for tri in inp.triangles:
        try:
            xis[tri] = u1_angle_of(holonomy(al, vertices, tri), HOLONOMY_TOL)
        except NotInSubgroupError as exc:
            raise LemmaViolationError(f"holonomy at {tri} is not in U(1): {exc}") from exc
        # Placement order (i, j, k) with the missing (l, m) making (ijklm) even.
        l, m = (v for v in vertices if v not in tri)
        order = tri if permutation_parity(tri + (l, m)) > 0 else (tri[1], tri[0], tri[2])
        sig = sigma_rotation(order, inp.lengths)
        h = compose(sig.inverse(), compose(compose(al.frame(l, tri).inverse(), al.frame(m, tri)), sig))
        xis_sigma[tri] = u1_angle_of(h, HOLONOMY_TOL)

    eps, worst, res = _best_epsilon(xis, phis)
    eps_s, worst_s, _ = _best_epsilon(xis_sigma, phis)
    if worst > tol or worst_s > tol:
        raise LemmaViolationError(
            f"no global sign reproduces xi = pi + eps phi (residuals {worst:.3g}, {worst_s:.3g})"
        )
    triangles = {t: TriangleAngles(xis[t], phis[t], eps, res[t]) for t in inp.triangles}

    a_rots = []
    for m in vertices:
        tet = [v for v in vertices if v != m]
        for i, j in itertools.permutations(tet, 2):
            k, l = (v for v in tet if v not in (i, j))
            if permutation_parity((i, j, k, l, m)) < 0:
                k, l = l, k
            t_ijk = tuple(sorted((i, j, k)))
            t_ijl = tuple(sorted((i, j, l)))
            a = compose(
                compose(sigma_rotation((i, j, k), inp.lengths).inverse(), al.k[m, t_ijk].inverse()),
                compose(al.k[m, t_ijl], sigma_rotation((i, j, l), inp.lengths)),
            )
            M = a.matrix()
            plane_res = float(np.linalg.norm(M[:, [0, 3]] - np.eye(4)[:, [0, 3]]))
            angle = math.atan2(M[2, 1], M[1, 1])
            a_rots.append(
                ARotation(m, (i, j, k, l), angle, plane_res, _tetra_dihedral(al.references[m], i, j, k, l))
            )
    max_a = max(r.plane_residual for r in a_rots)
    max_a_angle = max(abs(wrap_angle(r.angle - r.tetra_dihedral)) for r in a_rots)
    if max_a > tol:
        raise LemmaViolationError(f"a-rotation leaves the (e1, e4) plane (residual {max_a:.3g})")
    return LemmaReport(orientation, triangles, eps, worst, eps_s, worst_s, a_rots, max_a, max_a_angle)


# ---------------------------------------------------------------------------
# Single-tetrahedron 2-intertwiners


def tetrahedron_triangles(tet: Sequence) -> dict[str, tuple]:
    """The four triangles of ``tet`` (ascending) by their role in the 2-intertwiner.

    For vertices j < k < l < m with x = jk, y = kl, v = lm, w = jm: source
    triangles (x, y, x+y) and (x+y, v, w); target triangles (y, v, y+v) and
    (x, y+v, w).
    """
    j, k, l, m = sorted(tet)
    return {"ul": (j, k, l), "dr": (j, l, m), "ur": (k, l, m), "dl": (j, k, m)}


def two_intertwiner(
    lengths: EdgeLengths,
    spins: Mapping[tuple, int],
    g: Rotation,
    *,
    flipped: bool = False,
    dual: bool = False,
    threshold: float = 0.5,
) -> complex:
    """Value of the normalized 2-intertwiner (or its dual) at the tetrahedron
    ``g . ref`` where ``ref`` is the (flipped if requested) reference."""
    tet = lengths.vertices
    ref = reference_tetrahedron(lengths)
    if flipped:
        ref = ref.transformed(u1(math.pi).matrix())
    pts = dict(zip(ref.labels, ref.points))
    roles = tetrahedron_triangles(tet)

    def factor(role):
        tri = roles[role]
        k = align_triangle(reference_triangle_vectors(lengths, tri), triangle_vectors(pts, tri))
        return PhaseCocycle(spins.get(tri, 0), threshold)(compose(g, k))

    if dual:
        return factor("ul") * factor("dr") / (factor("dl") * factor("ur"))
    return factor("dl") * factor("ur") / (factor("ul") * factor("dr"))


def dual_pairing(lengths: EdgeLengths, spins: Mapping[tuple, int], g: Rotation, threshold: float = 0.5) -> complex:
    """``(-1)^(sum s) m_bar m`` at the tetrahedron ``g . ref``; equals 1."""
    m = two_intertwiner(lengths, spins, g, threshold=threshold)
    # Same quadrangle seen from the flipped reference: g . ref = (g h_pi) . (h_pi ref).
    m_bar = two_intertwiner(lengths, spins, compose(g, u1(math.pi)), flipped=True, dual=True, threshold=threshold)
    total = sum(spins.get(t, 0) for t in tetrahedron_triangles(lengths.vertices).values())
    return spin_sign(total) * m_bar * m
