"""Triangulated 4-manifolds, labelings and the state-sum weight.

A :class:`Triangulation4` is a list of oriented 4-simplices ("pents"). Each
pent is stored with its vertices in ascending order and a sign: +1 means the
ascending order is its orientation. The tetrahedron obtained by omitting the
vertex at (0-based) position ``i`` inherits the sign ``(-1)^i`` times the pent's
sign. Interior tetrahedra must inherit opposite signs from their two pents.

Weight of a labeling ``(l, s)``::

    W = prod_{interior t} 2 A_t  *  prod_{interior tet} (-1)^(sum of its 4 spins)  *  prod_pents 10j

It vanishes when some triangle violates the triangle inequality or some pent
is degenerate. The cosine form drops the tetrahedron and 10j signs.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    DegenerateSimplexError,
    GeometryError,
    StatisticsError,
    TriangulationError,
)
from .geometry4d import EdgeLengths, dihedral_angles, embed, triangle_area
from .so4 import permutation_parity
from .symbols import TenJInput, spin_sign, ten_j


def _faces(simplex: Sequence, k: int) -> list[tuple]:
    return list(itertools.combinations(simplex, k))


def _sort_key(label):
    # Mixed integer / string labels sort integers first, then strings.
    return (0, label, "") if isinstance(label, int) else (1, 0, str(label))


def canonical(simplex: Iterable) -> tuple:
    return tuple(sorted(simplex, key=_sort_key))


def oriented_sign(vertices: Sequence, sign: int = 1) -> tuple[tuple, int]:
    """Ascending vertex tuple and the sign making it equal to ``sign * [vertices]``."""
    order = canonical(vertices)
    index = {v: i for i, v in enumerate(order)}
    return order, sign * permutation_parity([index[v] for v in vertices])


def induced_signs(pent: tuple, sign: int) -> dict[tuple, int]:
    """Orientation signs the pent induces on its five boundary tetrahedra."""
    return {pent[:i] + pent[i + 1 :]: sign * (-1) ** i for i in range(5)}


@dataclass(frozen=True)
class Triangulation4:
    """An oriented simplicial 4-complex given by its pents.

    ``pents`` maps each ascending 5-tuple to its orientation sign; iteration
    order is canonical, so results never depend on input order.
    """

    vertices: tuple
    pents: dict
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        pents = {}
        for p, sign in self.pents.items():
            if len(set(p)) != 5:
                raise TriangulationError(f"pent {p} does not have five distinct vertices", self.lines.get(p))
            key, sgn = oriented_sign(p, sign)
            if key in pents:
                raise TriangulationError(f"duplicate pent {key}", self.lines.get(p))
            pents[key] = sgn
        vertices = canonical(self.vertices)
        if len(set(vertices)) != len(vertices):
            raise TriangulationError("duplicate vertex")
        known = set(vertices)
        for p in pents:
            missing = [v for v in p if v not in known]
            if missing:
                raise TriangulationError(f"pent {p} uses undeclared vertex {missing[0]}", self.lines.get(p))
        ordered = dict(sorted(pents.items(), key=lambda kv: [_sort_key(v) for v in kv[0]]))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "pents", ordered)
        self._validate()

    def _validate(self):
        seen: dict[tuple, list] = {}
        for p, sign in self.pents.items():
            for tet, s in induced_signs(p, sign).items():
                seen.setdefault(tet, []).append((p, s))
        for tet, owners in seen.items():
            if len(owners) > 2:
                raise TriangulationError(
                    f"tetrahedron {tet} lies in {len(owners)} pents (not a manifold)", self._line(owners[2][0])
                )
            if len(owners) == 2 and owners[0][1] == owners[1][1]:
                raise TriangulationError(
                    f"pents {owners[0][0]} and {owners[1][0]} induce the same orientation on {tet}",
                    self._line(owners[1][0]),
                )
        object.__setattr__(self, "_tet_owners", {t: tuple(p for p, _ in o) for t, o in sorted(seen.items())})

    def _line(self, pent):
        for raw, line in self.lines.items():
            if canonical(raw) == pent:
                return line
        return None

    # -- derived faces ---------------------------------------------------

    def faces(self, k: int) -> list[tuple]:
        """All k-vertex faces in canonical order."""
        out = set()
        for p in self.pents:
            out.update(_faces(p, k))
        return sorted(out, key=lambda f: [_sort_key(v) for v in f])

    @property
    def edges(self) -> list[tuple]:
        return self.faces(2)

    @property
    def triangles(self) -> list[tuple]:
        return self.faces(3)

    @property
    def tetrahedra(self) -> list[tuple]:
        return self.faces(4)

    def pents_containing(self, face: Iterable) -> list[tuple]:
        face = set(face)
        return [p for p in self.pents if face <= set(p)]

    def tet_pents(self, tet: tuple) -> tuple:
        return self._tet_owners[tet]

    def is_boundary_tet(self, tet: tuple) -> bool:
        return len(self._tet_owners[tet]) == 1

    @property
    def boundary_tetrahedra(self) -> list[tuple]:
        return [t for t, o in self._tet_owners.items() if len(o) == 1]

    @property
    def interior_tetrahedra(self) -> list[tuple]:
        return [t for t, o in self._tet_owners.items() if len(o) == 2]

    @property
    def interior_triangles(self) -> list[tuple]:
        on_boundary = set()
        for tet in self.boundary_tetrahedra:
            on_boundary.update(_faces(tet, 3))
        return [t for t in self.triangles if t not in on_boundary]

    @property
    def is_closed(self) -> bool:
        return not self.boundary_tetrahedra

    def counts(self) -> tuple[int, int, int, int, int]:
        used = {v for p in self.pents for v in p}
        return (len(used), len(self.edges), len(self.triangles), len(self.tetrahedra), len(self.pents))

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.counts()))

    def with_pents(self, pents: Mapping, vertices: Iterable | None = None) -> Triangulation4:
        return Triangulation4(tuple(vertices if vertices is not None else self.vertices), dict(pents))

    def to_text(self, labeling: Labeling | None = None) -> str:
        lines = ["dim 4"]
        lines += [f"vertex {v}" for v in self.vertices]
        lines += [f"pent {' '.join(map(str, p))} {'+1' if s > 0 else '-1'}" for p, s in self.pents.items()]
        if labeling is not None:
            for e, x in labeling.l.items():
                lines.append(f"length {e[0]} {e[1]} {x!r}")
            for t, s in labeling.s.items():
                if s:
                    lines.append(f"spin {t[0]} {t[1]} {t[2]} {s}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Labeling:
    """Edge lengths and triangle spins; missing spins are 0 and zeros are not stored."""

    l: Mapping
    s: Mapping = field(default_factory=dict)

    def __post_init__(self):
        lengths = {}
        for e, x in dict(self.l).items():
            key = canonical(e)
            if not (x > 0 and math.isfinite(x)):
                raise GeometryError(f"length of {key} must be positive, got {x!r}")
            lengths[key] = float(x)
        spins = {}
        for t, v in dict(self.s).items():
            if int(v) != v:
                raise GeometryError(f"spin on {t} is not an integer: {v!r}")
            if v:
                spins[canonical(t)] = int(v)
        object.__setattr__(self, "l", lengths)
        object.__setattr__(self, "s", spins)

    def spin(self, tri: tuple) -> int:
        return self.s.get(tri, 0)

    def edge_lengths(self, simplex: Sequence) -> EdgeLengths:
        try:
            return EdgeLengths({e: self.l[e] for e in _faces(simplex, 2)})
        except KeyError as exc:
            raise GeometryError(f"no length for edge {exc.args[0]}") from None

    def require(self, tri: Triangulation4):
        missing = [e for e in tri.edges if e not in self.l]
        if missing:
            raise GeometryError(f"no length for edge {missing[0]}")

    def negated(self) -> Labeling:
        return Labeling(self.l, {t: -v for t, v in self.s.items()})

    def pent_input(self, pent: tuple) -> TenJInput:
        return TenJInput(self.edge_lengths(pent), {t: self.spin(t) for t in _faces(pent, 3)})

    @classmethod
    def from_points(cls, points: Mapping, spins: Mapping | None = None) -> Labeling:
        return cls(dict(EdgeLengths.from_points(points)), spins or {})


# ---------------------------------------------------------------------------
# File format


def _parse_int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise TriangulationError(f"{what} must be an integer, got {tok!r}", line) from None


def _label(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_labeled_triangulation(text: str) -> tuple[Triangulation4, Labeling]:
    """Parse a triangulation file into the complex and its labeling."""
    vertices, pents, lines = [], {}, {}
    lengths, spins = {}, {}
    vertex_lines, length_lines, spin_lines = {}, {}, {}
    header = False
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        tok = body.split()
        kw, args = tok[0], tok[1:]
        if not header:
            if kw != "dim":
                raise TriangulationError("file must start with 'dim 4'", n)
            if args != ["4"]:
                raise TriangulationError(f"only dimension 4 is supported, got {' '.join(args)!r}", n)
            header = True
            continue
        if kw == "dim":
            raise TriangulationError("repeated 'dim' header", n)
        if kw == "vertex":
            if len(args) != 1:
                raise TriangulationError("'vertex' takes one label", n)
            v = _label(args[0])
            if v in vertex_lines:
                raise TriangulationError(f"vertex {v} declared twice (first on line {vertex_lines[v]})", n)
            vertex_lines[v] = n
            vertices.append(v)
        elif kw == "pent":
            if len(args) != 6:
                raise TriangulationError("'pent' takes five vertices and a sign", n)
            p = tuple(_label(a) for a in args[:5])
            sign = _parse_int(args[5], n, "orientation")
            if sign not in (1, -1):
                raise TriangulationError(f"orientation must be +1 or -1, got {args[5]}", n)
            key = canonical(p)
            if len(set(p)) != 5:
                raise TriangulationError(f"pent {p} repeats a vertex", n)
            if key in {canonical(q) for q in pents}:
                raise TriangulationError(f"duplicate pent {key}", n)
            pents[p] = sign
            lines[p] = n
        elif kw == "length":
            if len(args) != 3:
                raise TriangulationError("'length' takes two vertices and a value", n)
            e = canonical(_label(a) for a in args[:2])
            if e[0] == e[1]:
                raise TriangulationError("an edge needs two distinct vertices", n)
            try:
                x = float(args[2])
            except ValueError:
                raise TriangulationError(f"length must be a number, got {args[2]!r}", n) from None
            if not (x > 0 and math.isfinite(x)):
                raise TriangulationError(f"length must be positive, got {args[2]}", n)
            if e in length_lines:
                raise TriangulationError(f"length of {e} declared twice (first on line {length_lines[e]})", n)
            length_lines[e] = n
            lengths[e] = x
        elif kw == "spin":
            if len(args) != 4:
                raise TriangulationError("'spin' takes three vertices and an integer", n)
            t = canonical(_label(a) for a in args[:3])
            if len(set(t)) != 3:
                raise TriangulationError("a triangle needs three distinct vertices", n)
            if t in spin_lines:
                raise TriangulationError(f"spin of {t} declared twice (first on line {spin_lines[t]})", n)
            spin_lines[t] = n
            spins[t] = _parse_int(args[3], n, "spin")
        else:
            raise TriangulationError(f"unknown keyword {kw!r}", n)
    if not header:
        raise TriangulationError("empty file: expected 'dim 4'")
    if not pents:
        raise TriangulationError("no pents declared")
    tri = Triangulation4(tuple(vertices), pents, lines)
    edges, triangles = set(tri.edges), set(tri.triangles)
    for e, n in length_lines.items():
        if e not in edges:
            raise TriangulationError(f"{e} is not an edge of the triangulation", n)
    for t, n in spin_lines.items():
        if t not in triangles:
            raise TriangulationError(f"{t} is not a triangle of the triangulation", n)
    return tri, Labeling(lengths, spins)


def parse_triangulation(text: str) -> Triangulation4:
    return parse_labeled_triangulation(text)[0]


def boundary_of_simplex(vertices: Sequence = (1, 2, 3, 4, 5, 6)) -> Triangulation4:
    """The boundary of an oriented 5-simplex: a triangulated 4-sphere."""
    vertices = tuple(vertices)
    if len(vertices) != 6:
        raise TriangulationError("the boundary of a 5-simplex needs six vertices")
    pents = {vertices[:i] + vertices[i + 1 :]: (-1) ** i for i in range(6)}
    return Triangulation4(vertices, pents)


def single_pent(vertices: Sequence = (1, 2, 3, 4, 5), sign: int = 1) -> Triangulation4:
    return Triangulation4(tuple(vertices), {tuple(vertices): sign})


def regular_labeling(tri: Triangulation4, length: float = 1.0, spins: Mapping | None = None) -> Labeling:
    return Labeling({e: length for e in tri.edges}, spins or {})


# ---------------------------------------------------------------------------
# Weight


@dataclass
class WeightFactors:
    """Every factor of the weight, in canonical order."""

    areas: dict = field(default_factory=dict)
    tet_signs: dict = field(default_factory=dict)
    ten_j: dict = field(default_factory=dict)
    cosines: dict = field(default_factory=dict)
    zero_reason: str | None = None

    @property
    def total(self) -> float:
        """Product of all factors (the weight with the sign factors)."""
        if self.zero_reason:
            return 0.0
        return _product(self.areas.values()) * _product(self.tet_signs.values()) * _product(self.ten_j.values())

    @property
    def cosine_total(self) -> float:
        """``prod 2A * prod cos(sum s phi) / V`` without any sign factors."""
        if self.zero_reason:
            return 0.0
        return _product(self.areas.values()) * _product(self.cosines.values())


def _product(values: Iterable[float]) -> float:
    out = 1.0
    for v in values:
        out *= v
    return out


def _check_inequalities(tri: Triangulation4, lab: Labeling) -> str | None:
    for a, b, c in tri.triangles:
        if triangle_area(lab.l[a, b], lab.l[b, c], lab.l[a, c]) <= 0.0:
            return f"triangle {(a, b, c)} violates the triangle inequality"
    return None


def weight_factors(tri: Triangulation4, lab: Labeling) -> WeightFactors:
    lab.require(tri)
    out = WeightFactors()
    reason = _check_inequalities(tri, lab)
    if reason:
        out.zero_reason = reason
        return out
    for t in tri.interior_triangles:
        a, b, c = t
        out.areas[t] = 2.0 * triangle_area(lab.l[a, b], lab.l[b, c], lab.l[a, c])
    for tet in tri.interior_tetrahedra:
        out.tet_signs[tet] = spin_sign(sum(lab.spin(t) for t in _faces(tet, 3)))
    for p in tri.pents:
        try:
            res = ten_j(lab.pent_input(p))
        except DegenerateSimplexError:
            out.zero_reason = f"pent {p} is degenerate or not realizable"
            return out
        out.ten_j[p] = res.value
        out.cosines[p] = res.sign * res.value
    return out


def weight(tri: Triangulation4, lab: Labeling) -> float:
    """State-sum weight with the tetrahedron sign factors; 0 off the geometric region."""
    return weight_factors(tri, lab).total


def cosine_weight(tri: Triangulation4, lab: Labeling) -> float:
    """Weight in the unsigned form ``prod 2A * prod cos(sum s phi)/V``."""
    return weight_factors(tri, lab).cosine_total


def boundary_sign(tri: Triangulation4, lab: Labeling) -> int:
    """Ratio of the two conventions, ``weight / cosine_weight``, as a sign.

    It is the product of the tetrahedron signs and the 10j signs, which is +1
    on closed complexes and depends only on boundary spins otherwise.
    """
    exponent = sum(lab.spin(t) for tet in tri.interior_tetrahedra for t in _faces(tet, 3))
    exponent += sum(lab.spin(t) for p in tri.pents for t in _faces(p, 3))
    return spin_sign(exponent)


# ---------------------------------------------------------------------------
# Deficit angles and action


def pent_dihedrals(lab: Labeling, pent: tuple) -> dict:
    lengths = lab.edge_lengths(pent)
    try:
        return dihedral_angles(embed(lengths, 1))
    except GeometryError as exc:
        raise type(exc)(f"pent {pent}: {exc}") from None


def deficit_angles(tri: Triangulation4, lab: Labeling, eta: Mapping | None = None) -> dict:
    """``omega_t = sum over pents containing t of eta_p * phi_t^p``.

    ``eta`` gives the geometric orientation of each pent relative to its
    stored one; it defaults to +1 everywhere.
    """
    eta = eta or {}
    omega = {t: 0.0 for t in tri.triangles}
    for p in tri.pents:
        sign = eta.get(p, 1)
        for t, phi in pent_dihedrals(lab, p).items():
            omega[t] += sign * phi
    return omega


def action(tri: Triangulation4, lab: Labeling, eta: Mapping | None = None) -> float:
    omega = deficit_angles(tri, lab, eta)
    return sum(lab.spin(t) * w for t, w in omega.items())


def geometric_orientations(tri: Triangulation4, points: Mapping) -> dict:
    """For each pent, +1 if embedding ``points`` preserves its stored orientation."""
    eta = {}
    for p, sign in tri.pents.items():
        x = np.array([points[v] for v in p], float)
        det = np.linalg.det(x[1:] - x[0])
        if abs(det) < 1e-12 * max(1.0, np.abs(x).max()) ** 4:
            raise DegenerateSimplexError(f"pent {p} is flat in the given coordinates")
        eta[p] = sign * int(np.sign(det))
    return eta


# ---------------------------------------------------------------------------
# Cutoff Monte Carlo


@dataclass(frozen=True)
class CutoffConfig:
    """Cutoffs and sampling plan for :func:`partition_estimate`.

    ``proposal="uniform"`` samples every ``l^2`` uniformly on ``(0, L^2]``;
    ``"concentrated"`` uses a truncated normal in ``l^2`` around
    ``(center * L)^2`` with relative spread ``spread`` and reweights.
    """

    L: float = 1.0
    S: int = 0
    samples: int = 1000
    seed: int = 0
    proposal: str = "concentrated"
    center: float = 0.8
    spread: float = 0.35

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"length cutoff must be positive, got {self.L}")
        if self.S < 0:
            raise ValueError(f"spin cutoff must be non-negative, got {self.S}")
        if self.samples < 2:
            raise ValueError("need at least two samples")
        if self.proposal not in ("uniform", "concentrated"):
            raise ValueError(f"unknown proposal {self.proposal!r}")


@dataclass(frozen=True)
class PartitionEstimate:
    value: float
    error: float
    samples: int
    acceptance: float
    config: CutoffConfig


def _length_sampler(cfg: CutoffConfig, n_edges: int, rng):
    top = cfg.L**2
    if cfg.proposal == "uniform":
        sq = top * (1.0 - rng.random(n_edges))  # (0, L^2]
        return sq, 1.0 / top**n_edges
    mu = (cfg.center * cfg.L) ** 2
    sd = cfg.spread * mu
    dist = stats.truncnorm((0.0 - mu) / sd, (top - mu) / sd, loc=mu, scale=sd)
    sq = dist.ppf(rng.random(n_edges))
    return sq, float(np.prod(dist.pdf(sq)))


def partition_estimate(tri: Triangulation4, cfg: CutoffConfig) -> PartitionEstimate:
    """Regularized estimate of ``int prod dl^2 (1/2pi)^#t sum_{|s|<=S} W``.

    A cutoff diagnostic: the unregularized sum diverges, so the value depends
    on ``L`` and ``S``.
    """
    if not tri.is_closed:
        raise TriangulationError("the partition estimate needs a closed triangulation")
    rng = np.random.default_rng(cfg.seed)
    edges, triangles = tri.edges, tri.triangles
    spin_factor = ((2 * cfg.S + 1) / (2 * math.pi)) ** len(triangles)
    values = np.empty(cfg.samples)
    accepted = 0
    for k in range(cfg.samples):
        sq, density = _length_sampler(cfg, len(edges), rng)
        spins = rng.integers(-cfg.S, cfg.S + 1, len(triangles))
        lab = Labeling(dict(zip(edges, np.sqrt(sq))), dict(zip(triangles, spins.tolist())))
        w = weight(tri, lab)
        if w != 0.0:
            accepted += 1
        values[k] = w * spin_factor / density
    if accepted == 0:
        raise StatisticsError(f"no geometric sample among {cfg.samples} draws")
    return PartitionEstimate(
        float(values.mean()), float(values.std(ddof=1) / math.sqrt(cfg.samples)), cfg.samples, accepted / cfg.samples, cfg
    )
