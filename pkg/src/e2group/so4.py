"""SO(4) as pairs of unit quaternions, the U(1) subgroup and phase cocycles.

R^4 is identified with the quaternions through e1, e2, e3, e4 = 1, i, j, k.
A rotation ``(qL, qR)`` acts as ``x -> qL * x * conj(qR)``; the pairs
``(qL, qR)`` and ``(-qL, -qR)`` are the same rotation.

The U(1) subgroup fixes the (e1, e2) plane pointwise and ``u1(theta)`` turns
the (e3, e4) plane by ``theta``. The SO(3) subgroup fixes e4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation as _R3

from .errors import GeometryError, NotInSubgroupError
from .geometry4d import reference_triangle

#: Membership tolerance for ``u1_angle_of`` (Frobenius residual).
U1_TOL = 1e-8


def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternions stored as (w, x, y, z)."""
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ]
    )


def qconj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def _left_matrix(q):
    w, x, y, z = q
    return np.array([[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]])


def _right_matrix(q):
    # Matrix of x -> x * q
    w, x, y, z = q
    return np.array([[w, -x, -y, -z], [x, w, z, -y], [y, -z, w, x], [z, y, -x, w]])


def _unit(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise GeometryError("zero quaternion")
    return q / n


@dataclass(frozen=True, eq=False)
class Rotation:
    """An element of SO(4) stored as a pair of unit quaternions."""

    qL: np.ndarray
    qR: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "qL", _unit(self.qL))
        object.__setattr__(self, "qR", _unit(self.qR))

    @classmethod
    def identity(cls) -> Rotation:
        return cls(np.array([1.0, 0, 0, 0]), np.array([1.0, 0, 0, 0]))

    @classmethod
    def from_matrix(cls, M: np.ndarray, tol: float = 1e-9) -> Rotation:
        """Quaternion pair of a 4x4 special orthogonal matrix."""
        M = np.asarray(M, dtype=float)
        if M.shape != (4, 4):
            raise GeometryError(f"expected a 4x4 matrix, got {M.shape}")
        if np.linalg.norm(M.T @ M - np.eye(4)) > tol or np.linalg.det(M) < 0:
            raise GeometryError("matrix is not in SO(4)")
        # M e1 = qL conj(qR) =: p ; then conj(p) M is conjugation by qR.
        p = _unit(M[:, 0])
        inner = _left_matrix(qconj(p)) @ M
        qR = _R3.from_matrix(inner[1:, 1:]).as_quat()  # (x, y, z, w)
        qR = np.array([qR[3], qR[0], qR[1], qR[2]])
        return cls(qmul(p, qR), qR)

    def matrix(self) -> np.ndarray:
        return _left_matrix(self.qL) @ _right_matrix(qconj(self.qR))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Act on a vector or on the rows of an (n, 4) array."""
        return np.asarray(x) @ self.matrix().T

    def inverse(self) -> Rotation:
        return Rotation(qconj(self.qL), qconj(self.qR))

    def __matmul__(self, other: Rotation) -> Rotation:
        return compose(self, other)

    def distance(self, other: Rotation) -> float:
        """Frobenius distance of the 4x4 matrices."""
        return float(np.linalg.norm(self.matrix() - other.matrix()))

    def isclose(self, other: Rotation, tol: float = 1e-10) -> bool:
        same = np.linalg.norm(self.qL - other.qL) + np.linalg.norm(self.qR - other.qR)
        flip = np.linalg.norm(self.qL + other.qL) + np.linalg.norm(self.qR + other.qR)
        return min(same, flip) <= tol

    def __repr__(self) -> str:
        return f"Rotation(qL={np.round(self.qL, 12).tolist()}, qR={np.round(self.qR, 12).tolist()})"


def compose(a: Rotation, b: Rotation) -> Rotation:
    """The rotation ``x -> a(b(x))``."""
    return Rotation(qmul(a.qL, b.qL), qmul(a.qR, b.qR))


def u1(theta: float) -> Rotation:
    """Rotation by ``theta`` in the (e3, e4) plane, fixing e1 and e2."""
    q = np.array([math.cos(theta / 2), math.sin(theta / 2), 0.0, 0.0])
    return Rotation(q, q)


def a_pi() -> Rotation:
    """Half turn fixing the (e1, e4) plane: diag(1, -1, -1, 1)."""
    return Rotation.from_matrix(np.diag([1.0, -1.0, -1.0, 1.0]))


def haar_sample(rng: np.random.Generator) -> Rotation:
    """Haar-distributed rotation: independent uniform unit quaternions."""
    q = rng.standard_normal((2, 4))
    return Rotation(q[0], q[1])


def haar_samples(rng: np.random.Generator, n: int) -> list[Rotation]:
    q = rng.standard_normal((n, 2, 4))
    return [Rotation(a, b) for a, b in q]


def embed_so3(R3: np.ndarray) -> np.ndarray:
    """4x4 matrix of a 3x3 rotation acting on (e1, e2, e3) and fixing e4."""
    M = np.eye(4)
    M[:3, :3] = R3
    return M


def u1_angle_of(g: Rotation, tol: float = U1_TOL) -> float:
    """Angle ``xi`` in (-pi, pi] with ``g == u1(xi)``."""
    M = g.matrix()
    residual = float(np.linalg.norm(M[:, :2] - np.eye(4)[:, :2]))
    if residual > tol:
        raise NotInSubgroupError(f"rotation does not fix the (e1, e2) plane (residual {residual:.3g})", residual)
    xi = math.atan2(M[3, 2], M[2, 2])
    return math.pi if xi == -math.pi else xi


def wrap_angle(x: float) -> float:
    """Representative of ``x`` modulo 2 pi in (-pi, pi]."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


# ---------------------------------------------------------------------------
# Phase cocycle


def _half_phase(q: np.ndarray, threshold: float) -> float:
    """Phase of a unit quaternion that shifts by psi under q -> q exp(i psi).

    Writing q = z1 + z2 j, right multiplication by exp(i psi) sends
    (z1, z2) -> (z1 e^{i psi}, z2 e^{-i psi}); |z1| and |z2| are invariant, so
    choosing the chart by |z1|^2 keeps the cocycle law exact.
    """
    z1 = complex(q[0], q[1])
    z2 = complex(q[2], q[3])
    if abs(z1) ** 2 >= threshold:
        return math.atan2(z1.imag, z1.real)
    return -math.atan2(z2.imag, z2.real)


class PhaseCocycle:
    """Unit-modulus function on SO(4) with ``phi(g u1(t)) = exp(i s t) phi(g)``.

    The angle ``theta(g)`` is the sum of chart phases of ``qL`` and ``qR``;
    the chart switches where ``|z1|^2`` crosses ``threshold``. ``twist`` moves
    the section by a fixed left translation, giving a different but equally
    valid gauge.
    """

    def __init__(self, s: int, threshold: float = 0.5, twist: Rotation | None = None):
        if not 0.0 < threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        self.s = int(s)
        self.threshold = threshold
        self.twist = twist
        self._offset = 0.0 if twist is None else self._raw_theta(twist)

    def _raw_theta(self, g: Rotation) -> float:
        return _half_phase(g.qL, self.threshold) + _half_phase(g.qR, self.threshold)

    def theta(self, g: Rotation) -> float:
        """Section angle: ``g == k @ u1(theta(g))`` with ``k`` on the section."""
        if self.twist is not None:
            g = compose(self.twist, g)
        return wrap_angle(self._raw_theta(g) - self._offset)

    def section(self, g: Rotation) -> tuple[Rotation, float]:
        """Pair ``(k, theta)`` with ``g == k @ u1(theta)``."""
        th = self.theta(g)
        return compose(g, u1(-th)), th

    def __call__(self, g: Rotation) -> complex:
        return complex(np.exp(1j * self.s * self.theta(g)))

    def with_spin(self, s: int) -> PhaseCocycle:
        return PhaseCocycle(s, self.threshold, self.twist)


def phi_s(c: PhaseCocycle, g: Rotation) -> complex:
    return c(g)


# ---------------------------------------------------------------------------
# Alignment rotations


def _frame(vectors: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal frame from Gram-Schmidt on the columns, completed to SO(dim)."""
    Q, R = np.linalg.qr(vectors, mode="complete")
    k = vectors.shape[1]
    signs = np.sign(np.diag(R)[:k])
    if np.any(signs == 0):
        raise GeometryError("degenerate configuration: vectors are linearly dependent")
    Q[:, :k] *= signs
    if np.linalg.det(Q) < 0:
        Q[:, -1] *= -1
    return Q


def _check_congruent(src: np.ndarray, dst: np.ndarray, what: str, tol: float):
    G_src = src @ src.T
    G_dst = dst @ dst.T
    scale = max(np.abs(G_src).max(), 1e-300)
    if np.abs(G_src - G_dst).max() > tol * scale:
        raise GeometryError(f"{what} are not congruent")


def align_triangle(src: np.ndarray, dst: np.ndarray, tol: float = 1e-9) -> Rotation:
    """The SO(3) rotation (fixing e4) carrying triangle ``src`` onto ``dst``.

    Triangles are (3, 4) arrays of edge vectors ``(x, y, z)`` with
    ``x + y = z``; ``src`` lies in the (e1, e2) plane and ``dst`` in
    span(e1, e2, e3).
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    scale = max(np.abs(src).max(), np.abs(dst).max())
    if np.abs(src[:, 2:]).max() > tol * scale:
        raise GeometryError("source triangle is not in the (e1, e2) plane")
    if np.abs(dst[:, 3]).max() > tol * scale:
        raise GeometryError("target triangle is not in span(e1, e2, e3)")
    _check_congruent(src, dst, "triangles", tol)
    A = np.column_stack([src[0, :3], src[2, :3]])
    B = np.column_stack([dst[0, :3], dst[2, :3]])
    K = _frame(B, 3) @ _frame(A, 3).T
    return Rotation.from_matrix(embed_so3(K))


def align_tetrahedron(ref, dst, tol: float = 1e-9) -> Rotation:
    """The unique SO(4) rotation carrying the 4 points of ``ref`` onto ``dst``.

    Only difference vectors matter: translations are ignored.
    """
    P = np.asarray(getattr(ref, "points", ref), dtype=float)
    Q = np.asarray(getattr(dst, "points", dst), dtype=float)
    if P.shape != (4, 4) or Q.shape != (4, 4):
        raise GeometryError("tetrahedra must be given as 4 points in R^4")
    A = (P[1:] - P[0]).T
    B = (Q[1:] - Q[0]).T
    _check_congruent(A.T, B.T, "tetrahedra", tol)
    g = _frame(B, 4) @ _frame(A, 4).T
    if np.abs(g @ A - B).max() > 1e3 * tol * max(np.abs(B).max(), 1.0):
        raise GeometryError("tetrahedron alignment failed")
    return Rotation.from_matrix(g)


def sigma_rotation(order, lengths) -> Rotation:
    """Rotation carrying a triangle placed in ``order`` onto its reference.

    ``order`` = (i, j, k) places i at the origin, j on the positive e1 axis and
    k in the upper (e1, e2) half plane. The reference placement is the same
    with the vertices in ascending order. Only edge vectors are mapped, so the
    translation between the two placements is irrelevant. For an even
    reordering the result rotates the (e1, e2) plane and fixes e3, e4; for an
    odd one it is such a rotation times ``a_pi``.
    """
    a, b, c = sorted(order)
    x0, z0 = reference_triangle(lengths[a, b], lengths[b, c], lengths[a, c])
    ref = {a: np.zeros(2), b: x0[:2], c: z0[:2]}
    i, j, k = order
    xi, zi = reference_triangle(lengths[i, j], lengths[j, k], lengths[i, k])
    new = {i: np.zeros(2), j: xi[:2], k: zi[:2]}
    F_ref = np.column_stack([ref[j] - ref[i], ref[k] - ref[i]])
    F_new = np.column_stack([new[j] - new[i], new[k] - new[i]])
    M2 = F_ref @ np.linalg.inv(F_new)
    M = np.eye(4)
    M[:2, :2] = M2
    if np.linalg.det(M2) < 0:
        M[2, 2] = -1.0
    return Rotation.from_matrix(M, tol=1e-8)


def permutation_parity(seq) -> int:
    """+1 for an even arrangement of distinct sortable items, -1 for odd."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign
