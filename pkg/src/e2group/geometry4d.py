"""Euclidean simplices from edge lengths: areas, volumes, embeddings, angles.

Vertex labels are arbitrary sortable hashables (ints in most places). All
coordinates live in R^4 with the standard basis e1..e4; lower dimensional
objects are padded with zeros.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Hashable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSimplexError, GeometryError

#: Relative threshold on the Cayley-Menger determinant below which a simplex
#: counts as degenerate (multiplied by scale**(2k)).
CM_DEGENERACY_TOL = 1e-10

SIMPLEX_VERTICES = (1, 2, 3, 4, 5)


def _pair(a, b):
    if a == b:
        raise GeometryError(f"edge with identical endpoints {a!r}")
    return (a, b) if a < b else (b, a)


class EdgeLengths(Mapping):
    """Positive lengths indexed by unordered vertex pairs.

    Keys are stored as sorted 2-tuples; lookups accept either order.

    >>> L = EdgeLengths({(1, 2): 3.0, (2, 3): 4.0, (1, 3): 5.0})
    >>> L[3, 2]
    4.0
    """

    def __init__(self, lengths: Mapping | Iterable = ()):
        items = lengths.items() if isinstance(lengths, Mapping) else lengths
        data = {}
        for (a, b), value in items:
            key = _pair(a, b)
            value = float(value)
            if not math.isfinite(value) or value <= 0.0:
                raise GeometryError(f"edge {key} has non-positive length {value!r}")
            if key in data and data[key] != value:
                raise GeometryError(f"conflicting lengths for edge {key}")
            data[key] = value
        self._data = data

    @classmethod
    def from_values(cls, values: Sequence[float], vertices: Sequence = SIMPLEX_VERTICES):
        """Lengths listed in lexicographic pair order over ``vertices``."""
        pairs = list(itertools.combinations(sorted(vertices), 2))
        if len(values) != len(pairs):
            raise GeometryError(f"expected {len(pairs)} lengths for {len(vertices)} vertices, got {len(values)}")
        return cls(zip(pairs, values))

    @classmethod
    def from_points(cls, points: Mapping[Hashable, Sequence[float]]):
        labels = sorted(points)
        return cls(
            ((a, b), float(np.linalg.norm(np.subtract(points[a], points[b]))))
            for a, b in itertools.combinations(labels, 2)
        )

    def __getitem__(self, pair):
        return self._data[_pair(*pair)]

    def __iter__(self) -> Iterator:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __repr__(self) -> str:
        return f"EdgeLengths({self._data!r})"

    @property
    def vertices(self) -> tuple:
        return tuple(sorted({v for pair in self._data for v in pair}))

    def is_complete(self, vertices: Iterable | None = None) -> bool:
        vertices = self.vertices if vertices is None else sorted(vertices)
        return all(p in self._data for p in itertools.combinations(vertices, 2))

    def restrict(self, vertices: Iterable) -> EdgeLengths:
        vertices = sorted(vertices)
        try:
            return EdgeLengths({p: self._data[p] for p in itertools.combinations(vertices, 2)})
        except KeyError as exc:
            raise GeometryError(f"missing length for edge {exc.args[0]}") from None

    def values_in_order(self) -> list[float]:
        return [self._data[p] for p in itertools.combinations(self.vertices, 2)]

    def scale(self) -> float:
        return max(self._data.values())


def _require_simplex(lengths: EdgeLengths, k: int | None = None) -> tuple:
    vertices = lengths.vertices
    if k is not None and len(vertices) != k + 1:
        raise GeometryError(f"a {k}-simplex needs {k + 1} vertices, got {len(vertices)}")
    if not lengths.is_complete():
        raise GeometryError("edge length set is incomplete for its vertices")
    return vertices


def triangle_area(l: float, m: float, n: float) -> float:
    """Area of the triangle with sides ``l, m, n``; exactly 0 unless the strict
    triangle inequality holds."""
    if min(l, m, n) <= 0.0:
        raise GeometryError(f"triangle sides must be positive: {(l, m, n)}")
    a, b, c = sorted((float(l), float(m), float(n)), reverse=True)
    if a >= b + c:
        return 0.0
    # Kahan's ordering keeps the product accurate for needle triangles.
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(max(prod, 0.0))


def gram_from_lengths(lengths: EdgeLengths) -> np.ndarray:
    """Gram matrix of the difference vectors from the first vertex."""
    v = _require_simplex(lengths)
    base, rest = v[0], v[1:]
    k = len(rest)
    G = np.empty((k, k))
    for i, a in enumerate(rest):
        for j, b in enumerate(rest):
            if i == j:
                G[i, j] = lengths[base, a] ** 2
            else:
                G[i, j] = 0.5 * (lengths[base, a] ** 2 + lengths[base, b] ** 2 - lengths[a, b] ** 2)
    return G


def cayley_menger(lengths: EdgeLengths) -> np.ndarray:
    v = _require_simplex(lengths)
    n = len(v)
    CM = np.ones((n + 1, n + 1))
    CM[0, 0] = 0.0
    for i, a in enumerate(v):
        for j, b in enumerate(v):
            CM[i + 1, j + 1] = 0.0 if i == j else lengths[a, b] ** 2
    return CM


def cm_volume(k: int, lengths: EdgeLengths) -> float:
    """k-volume of the simplex with the given edge lengths (Cayley-Menger).

    Returns 0 for degenerate simplices and raises :class:`GeometryError` when
    the lengths cannot be realized in Euclidean space.
    """
    if not 1 <= k <= 4:
        raise GeometryError(f"k must be in 1..4, got {k}")
    _require_simplex(lengths, k)
    scale = lengths.scale()
    det = float(np.linalg.det(cayley_menger(lengths)))
    # V^2 = (-1)^(k+1) det / (2^k (k!)^2)
    signed = (-1) ** (k + 1) * det
    tol = CM_DEGENERACY_TOL * scale ** (2 * k)
    if abs(det) < tol:
        return 0.0
    if signed < 0.0:
        raise GeometryError(f"edge lengths are not realizable as a Euclidean {k}-simplex")
    # Faces can be non-realizable while the top determinant has the right sign.
    eig = np.linalg.eigvalsh(gram_from_lengths(lengths))
    if eig[0] < -CM_DEGENERACY_TOL * scale**2 * k:
        raise GeometryError(f"edge lengths are not realizable as a Euclidean {k}-simplex")
    return math.sqrt(signed / (2**k * math.factorial(k) ** 2))


def simplex_V(lengths: EdgeLengths) -> float:
    """4! times the volume of the 4-simplex with the given ten edge lengths."""
    try:
        vol = cm_volume(4, lengths)
    except GeometryError as exc:
        raise DegenerateSimplexError(str(exc)) from None
    if vol == 0.0:
        raise DegenerateSimplexError("4-simplex has zero volume")
    return 24.0 * vol


@dataclass(frozen=True)
class Embedding:
    """Labeled points in R^4 (one row per label) and an orientation sign."""

    points: np.ndarray
    orientation: int = 1
    labels: tuple = field(default=())

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise GeometryError(f"points must have shape (n, 4), got {pts.shape}")
        object.__setattr__(self, "points", pts)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(pts))))
        if len(self.labels) != len(pts):
            raise GeometryError("one label per point required")
        if self.orientation not in (1, -1):
            raise GeometryError(f"orientation must be +1 or -1, got {self.orientation!r}")

    def __getitem__(self, label) -> np.ndarray:
        return self.points[self.labels.index(label)]

    def lengths(self) -> EdgeLengths:
        return EdgeLengths.from_points(dict(zip(self.labels, self.points)))

    def edge_vectors(self) -> np.ndarray:
        """Difference vectors from the first point, one per row."""
        return self.points[1:] - self.points[0]

    def determinant(self) -> float:
        if len(self.points) != 5:
            raise GeometryError("determinant needs exactly 5 points")
        return float(np.linalg.det(self.edge_vectors()))

    def transformed(self, matrix: np.ndarray, orientation: int | None = None) -> Embedding:
        pts = self.points @ np.asarray(matrix).T
        return Embedding(pts, self.orientation if orientation is None else orientation, self.labels)


def _pivoted_factor(G: np.ndarray, tol: float) -> np.ndarray:
    """Rows X with X @ X.T == G, built column by column with diagonal pivoting."""
    n = G.shape[0]
    R = np.array(G, dtype=float)
    cols = []
    for _ in range(n):
        d = np.diag(R)
        p = int(np.argmax(d))
        if d[p] <= tol:
            break
        c = R[:, p] / math.sqrt(d[p])
        cols.append(c)
        R = R - np.outer(c, c)
    if np.diag(R).min(initial=0.0) < -tol:
        raise GeometryError("edge lengths are not realizable (negative Gram eigenvalue)")
    if len(cols) > 4:
        raise GeometryError(f"edge lengths need {len(cols)} dimensions, more than 4")
    X = np.zeros((n, 4))
    if cols:
        X[:, : len(cols)] = np.column_stack(cols)
    return X


def embed(lengths: EdgeLengths, orientation: int = 1) -> Embedding:
    """Points in R^4 realizing ``lengths``; the first vertex sits at the origin.

    For five points the determinant of the difference vectors has the sign of
    ``orientation`` (the last coordinate is reflected if needed).
    """
    vertices = _require_simplex(lengths)
    if orientation not in (1, -1):
        raise GeometryError(f"orientation must be +1 or -1, got {orientation!r}")
    G = gram_from_lengths(lengths)
    scale = lengths.scale()
    X = _pivoted_factor(G, CM_DEGENERACY_TOL * scale**2 * max(len(G), 1))
    pts = np.vstack([np.zeros(4), X])
    if len(vertices) == 5 and np.linalg.det(X) * orientation < 0:
        pts[:, 3] = -pts[:, 3]
    return Embedding(pts, orientation, vertices)


def _unit_normal(vectors: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to three vectors in R^4."""
    _, s, vt = np.linalg.svd(np.asarray(vectors))
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise GeometryError("degenerate face: edge vectors are linearly dependent")
    return vt[-1]


def outward_normal(emb: Embedding, face: Sequence, opposite) -> np.ndarray:
    """Unit normal of the tetrahedron ``face`` pointing away from ``opposite``."""
    base = emb[face[0]]
    n = _unit_normal(np.array([emb[v] - base for v in face[1:]]))
    side = float(np.dot(n, emb[opposite] - base))
    if abs(side) <= 1e-12 * max(np.linalg.norm(emb[opposite] - base), 1e-300):
        raise DegenerateSimplexError("opposite vertex lies in the face hyperplane")
    return -n if side > 0 else n


def dihedral_angle(emb: Embedding, triangle: Sequence) -> float:
    """Interior dihedral angle of a 4-simplex at one of its triangles."""
    if len(emb.labels) != 5:
        raise GeometryError("dihedral_angle needs a 5-point embedding")
    triangle = tuple(triangle)
    if len(set(triangle)) != 3 or not set(triangle) <= set(emb.labels):
        raise GeometryError(f"{triangle} is not a triangle of the simplex")
    a, b, c = (emb[v] for v in triangle)
    s = np.linalg.svd(np.array([b - a, c - a]), compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise GeometryError(f"triangle {triangle} is degenerate")
    p, q = (v for v in emb.labels if v not in triangle)
    n_p = outward_normal(emb, triangle + (p,), q)
    n_q = outward_normal(emb, triangle + (q,), p)
    return math.acos(float(np.clip(-np.dot(n_p, n_q), -1.0, 1.0)))


def dihedral_angles(emb: Embedding) -> dict[tuple, float]:
    """All ten dihedral angles keyed by sorted vertex triples."""
    return {t: dihedral_angle(emb, t) for t in itertools.combinations(emb.labels, 3)}


def _corner_angle(adjacent1: float, adjacent2: float, opposite: float) -> float:
    c = (adjacent1**2 + adjacent2**2 - opposite**2) / (2.0 * adjacent1 * adjacent2)
    return math.acos(min(1.0, max(-1.0, c)))


def reference_triangle(l: float, m: float, n: float) -> tuple[np.ndarray, np.ndarray]:
    """Reference triangle with sides ``|x0| = l``, ``|z0 - x0| = m``, ``|z0| = n``.

    ``x0`` lies along e1 and ``z0`` in the (e1, e2) plane with non-negative e2
    component, so that ``(x0, z0)`` is positively oriented.
    """
    if triangle_area(l, m, n) == 0.0:
        raise GeometryError(f"sides {(l, m, n)} violate the strict triangle inequality")
    gamma = _corner_angle(l, n, m)
    x0 = np.array([l, 0.0, 0.0, 0.0])
    z0 = np.array([n * math.cos(gamma), n * math.sin(gamma), 0.0, 0.0])
    return x0, z0


def reference_tetrahedron(lengths: EdgeLengths) -> Embedding:
    """Reference tetrahedron in span(e1, e2, e3).

    With vertices ``j < k < l < m``: ``j`` at the origin, ``k`` on the positive
    e1 axis, ``l`` in the upper (e1, e2) half plane, ``m`` with positive e3
    component.
    """
    j, k, l, m = _require_simplex(lengths, 3)
    if cm_volume(3, lengths) == 0.0:
        raise DegenerateSimplexError(f"tetrahedron {(j, k, l, m)} is degenerate")
    x0, z0 = reference_triangle(lengths[j, k], lengths[k, l], lengths[j, l])
    r = lengths[j, m]
    g1 = _corner_angle(lengths[j, k], r, lengths[k, m])
    # Place w0 = r cos g1 e1 + r sin g1 (cos th e2 + sin th e3), |w0 - z0| = |lm|.
    a = z0[0]
    b = z0[1]
    target = lengths[l, m] ** 2
    # |w0 - z0|^2 = r^2 + n^2 - 2 (a r cos g1 + b r sin g1 cos th)
    n2 = a * a + b * b
    cos_th = (r * r + n2 - target - 2.0 * a * r * math.cos(g1)) / (2.0 * b * r * math.sin(g1))
    th = math.acos(min(1.0, max(-1.0, cos_th)))
    w0 = r * np.array([math.cos(g1), math.sin(g1) * math.cos(th), math.sin(g1) * math.sin(th), 0.0])
    return Embedding(np.array([np.zeros(4), x0, z0, w0]), 1, (j, k, l, m))
