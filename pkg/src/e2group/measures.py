"""Monte Carlo checks of the spherical, triangle and pentagon measures.

Every delta function ``delta(u)`` is replaced by a centred Gaussian of width
``w * scale`` and the estimates at the widths in :data:`WIDTHS` are
extrapolated to ``w -> 0`` (Richardson extrapolation in ``w^2``). The narrow
Gaussian is sampled by importance sampling along the one coordinate it
constrains, with common random numbers across widths so that the
extrapolation does not amplify the noise.

Measures:

* spherical measure ``d^3_l x = (1/pi) d^4x delta(|x|^2 - l^2)``;
* triangle measure ``d^3_l x d^3_m y d^3_n z delta^4(x + y - z)``;
* pentagon measure ``(1/(kappa pi^5)) prod d^4 x_{i,i+1} prod_{i<j} delta(|x_ij|^2 - l_ij^2)``,
  whose constant ``kappa`` is fixed by requiring it to equal
  ``(1/V) dg sum_eta`` (total mass ``2/V``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StatisticsError
from .geometry4d import EdgeLengths, simplex_V, triangle_area

#: Relative delta-function widths used for the extrapolation.
WIDTHS = (0.02, 0.01, 0.005)
#: Proposal width relative to the Gaussian it samples.
PROPOSAL_SCALE = 2.0
#: Below this many samples no error bar is trusted.
MIN_SAMPLES = 1000
CHUNK = 200_000


@dataclass(frozen=True)
class Estimate:
    """A width-extrapolated Monte Carlo estimate with its one-sigma error."""

    value: float
    error: float
    samples: int
    widths: tuple = WIDTHS
    per_width: tuple = ()
    expected: float | None = None

    @property
    def relative_error(self) -> float:
        return self.error / abs(self.value) if self.value else math.inf

    def ratio(self) -> float:
        return self.value / self.expected

    def deviation(self) -> float:
        """Relative deviation from the expected value."""
        return abs(self.value / self.expected - 1.0)


@dataclass
class MeasureReport:
    kappa: Estimate
    kappa_expected: float
    triangles: dict = field(default_factory=dict)


def richardson_weights(widths=WIDTHS) -> np.ndarray:
    """Coefficients ``c`` with ``sum_i c_i f(w_i) = f(0)`` for ``f`` a polynomial
    of degree ``len(widths) - 1`` in ``w^2``."""
    x = np.asarray(widths, float) ** 2
    c = np.empty(len(x))
    for i in range(len(x)):
        others = np.delete(x, i)
        c[i] = np.prod(others / (others - x[i]))
    return c


def _gaussian(u, sigma):
    return np.exp(-0.5 * (u / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))


def _check_samples(n: int):
    if n < MIN_SAMPLES:
        raise StatisticsError(f"need at least {MIN_SAMPLES} samples, got {n}")


def _finish(per_sample: list[np.ndarray], widths, expected, rel_tol) -> Estimate:
    """Combine per-sample weights at each width into the extrapolated estimate."""
    W = np.vstack(per_sample)  # widths x samples
    c = richardson_weights(widths)
    combined = c @ W
    n = W.shape[1]
    value = float(combined.mean())
    error = float(combined.std(ddof=1) / math.sqrt(n))
    est = Estimate(value, error, n, tuple(widths), tuple(float(v) for v in W.mean(axis=1)), expected)
    if rel_tol is not None and not est.relative_error <= rel_tol:
        raise StatisticsError(
            f"relative error {est.relative_error:.3g} exceeds the requested {rel_tol:.3g} with {n} samples"
        )
    return est


def _directions(rng, n, dim=4):
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _orthogonal_directions(rng, axes):
    """Uniform unit vectors orthogonal to each row of ``axes`` (unit rows)."""
    v = rng.standard_normal(axes.shape)
    v -= np.sum(v * axes, axis=1, keepdims=True) * axes
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _cosine_draws(rng, n, t_star, width_t):
    """Common standard-normal draws turned into cosines ``t`` near ``t_star``
    for each width; returns ``(z, [t_w], [q_w])``."""
    z = rng.standard_normal(n)
    ts, qs = [], []
    for wt in width_t:
        s = PROPOSAL_SCALE * wt
        ts.append(t_star + s * z)
        qs.append(_gaussian(s * z, s))
    return ts, qs


def _cosine_density(t):
    """Density of ``x . y / (|x||y|)`` for independent uniform directions in R^4."""
    inside = np.abs(t) < 1.0
    return np.where(inside, (2 / math.pi) * np.sqrt(np.clip(1 - t * t, 0.0, None)), 0.0)


# ---------------------------------------------------------------------------


def sphere_volume_mc(l: float, samples: int, rng, widths=WIDTHS, rel_tol=None) -> Estimate:
    """Total mass of ``(1/pi) d^4x delta(|x|^2 - l^2)``.

    Points are drawn as ``x = r * direction`` with ``r^2`` from a Gaussian
    proposal around ``l^2``; in these coordinates ``d^4x = pi^2 r^2 dr^2 d(direction)``.
    """
    _check_samples(samples)
    l2 = l * l
    z = rng.standard_normal(samples)
    dirs = _directions(rng, samples)
    rows = []
    for w in widths:
        sigma = w * l2
        s = PROPOSAL_SCALE * sigma
        r2 = l2 + s * z
        ok = r2 > 0
        x = np.sqrt(np.where(ok, r2, 0.0))[:, None] * dirs
        u = np.einsum("ij,ij->i", x, x) - l2
        weight = np.where(ok, (1 / math.pi) * _gaussian(u, sigma) * math.pi**2 * r2 / _gaussian(s * z, s), 0.0)
        rows.append(weight)
    return _finish(rows, widths, math.pi * l**3, rel_tol)


def triangle_measure_mc(l: float, m: float, n: float, samples: int, rng, widths=WIDTHS, rel_tol=None) -> Estimate:
    """Total mass of the triangle measure for edge lengths ``(l, m, n)``.

    Integrating ``z`` against ``delta^4`` leaves ``(1/pi) delta(|x + y|^2 - n^2)``.
    ``x`` and ``y`` are drawn on their spheres (mass ``pi l^2`` and ``pi m^2``
    each); the cosine between them is importance-sampled around the value
    that closes the triangle. ``expected`` is twice the area.
    """
    _check_samples(samples)
    lm = l * m
    t_star = (n * n - l * l - m * m) / (2 * lm)
    sigmas = [w * n * n for w in widths]
    ts, qs = _cosine_draws(rng, samples, t_star, [s / (2 * lm) for s in sigmas])
    xhat = _directions(rng, samples)
    perp = _orthogonal_directions(rng, xhat)
    rows = []
    for sigma, t, q in zip(sigmas, ts, qs):
        tc = np.clip(t, -1.0, 1.0)
        x = l * xhat
        y = m * (tc[:, None] * xhat + np.sqrt(1 - tc * tc)[:, None] * perp)
        u = np.einsum("ij,ij->i", x + y, x + y) - n * n
        weight = (math.pi * l * l) * (math.pi * m * m) * (1 / math.pi) * _cosine_density(t) * _gaussian(u, sigma) / q
        rows.append(weight)
    return _finish(rows, widths, 2 * triangle_area(l, m, n), rel_tol)


# ---------------------------------------------------------------------------
# Pentagon measure constant

EXTERIOR = ((1, 2), (2, 3), (3, 4), (4, 5), (1, 5))
INTERIOR = ((1, 3), (1, 4), (2, 4), (2, 5), (3, 5))
#: Constant for which the pentagon measure has total mass 2/V.
KAPPA_EXACT = 1 / (64 * math.pi)


def _interior_box(ext: dict) -> dict:
    """Triangle-inequality bounds on each interior length given the exterior ones."""
    bounds = {}
    for a, b in INTERIOR:
        lo, hi = 0.0, math.inf
        # The interior edge closes a triangle with two exterior edges through a third vertex.
        for c in range(1, 6):
            e1, e2 = tuple(sorted((a, c))), tuple(sorted((c, b)))
            if e1 in ext and e2 in ext:
                lo = max(lo, abs(ext[e1] - ext[e2]))
                hi = min(hi, ext[e1] + ext[e2])
        bounds[a, b] = (lo, hi)
    return bounds


def realizable_fraction(ext: dict, samples: int, rng) -> tuple[float, float, float]:
    """Volume of the realizable region of interior squared lengths.

    Returns ``(volume, error, acceptance)``; the region is sampled uniformly in
    the box of squared lengths allowed by the triangle inequalities and
    accepted when the Gram matrix is positive definite.
    """
    bounds = _interior_box(ext)
    lows = np.array([bounds[e][0] ** 2 for e in INTERIOR])
    highs = np.array([bounds[e][1] ** 2 for e in INTERIOR])
    box = float(np.prod(highs - lows))
    hits = 0
    done = 0
    while done < samples:
        k = min(CHUNK, samples - done)
        sq = lows + (highs - lows) * rng.random((k, 5))
        d2 = {e: np.full(k, ext[e] ** 2) for e in EXTERIOR}
        d2.update({e: sq[:, i] for i, e in enumerate(INTERIOR)})
        gram = np.empty((k, 4, 4))
        for i, a in enumerate((2, 3, 4, 5)):
            for j, b in enumerate((2, 3, 4, 5)):
                da = d2[1, a]
                db = d2[1, b]
                dab = 0.0 if a == b else d2[tuple(sorted((a, b)))]
                gram[:, i, j] = 0.5 * (da + db - dab)
        hits += int(np.sum(np.linalg.eigvalsh(gram)[:, 0] > 0))
        done += k
    p = hits / samples
    return box * p, box * math.sqrt(p * (1 - p) / samples), p


def pentagon_moment_mc(ext: dict, samples: int, rng, widths=WIDTHS) -> list[np.ndarray]:
    """Per-sample weights of ``(1/pi^5) int prod d^4x prod_ext delta * V``.

    The four chain vectors lie on their spheres; the closing delta on
    ``|x_12 + ... + x_45|^2`` is importance-sampled through the cosine between
    ``x_45`` and the partial sum.
    """
    l12, l23, l34, l45, l15 = (ext[e] for e in EXTERIOR)
    rows = [[] for _ in widths]
    done = 0
    while done < samples:
        k = min(CHUNK, samples - done)
        x12 = l12 * _directions(rng, k)
        x23 = l23 * _directions(rng, k)
        x34 = l34 * _directions(rng, k)
        s = x12 + x23 + x34
        snorm = np.linalg.norm(s, axis=1)
        shat = s / snorm[:, None]
        perp = _orthogonal_directions(rng, shat)
        t_star = (l15**2 - snorm**2 - l45**2) / (2 * snorm * l45)
        sigmas = [w * l15**2 for w in widths]
        z = rng.standard_normal(k)
        mass = (math.pi**2 * l12**2) * (math.pi**2 * l23**2) * (math.pi**2 * l34**2) * (math.pi**2 * l45**2)
        for r, sigma in enumerate(sigmas):
            wt = sigma / (2 * snorm * l45)
            sp = PROPOSAL_SCALE * wt
            t = t_star + sp * z
            tc = np.clip(t, -1.0, 1.0)
            x45 = l45 * (tc[:, None] * shat + np.sqrt(1 - tc * tc)[:, None] * perp)
            u = np.einsum("ij,ij->i", s + x45, s + x45) - l15**2
            vol = np.abs(np.linalg.det(np.stack([x12, x23, x34, x45], axis=1)))
            w = mass / math.pi**5 * _cosine_density(t) * _gaussian(u, sigma) / _gaussian(sp * z, sp) * vol
            rows[r].append(w)
        done += k
    return [np.concatenate(r) for r in rows]


def kappa_mc(ext: dict, samples: int, rng, widths=WIDTHS, rel_tol=None) -> Estimate:
    """Estimate of ``kappa`` from the moment of the pentagon measure against ``V``.

    If the measure equals ``(2 kappa / V) prod dl^2`` on the interior squared
    lengths then ``int V d(measure) = 2 kappa Vol(realizable)``.
    """
    _check_samples(samples)
    ext = {tuple(sorted(e)): float(v) for e, v in ext.items()}
    rows = pentagon_moment_mc(ext, samples, rng, widths)
    moment = _finish(rows, widths, None, None)
    vol, vol_err, _ = realizable_fraction(ext, samples, rng)
    value = moment.value / (2 * vol)
    error = abs(value) * math.hypot(moment.error / moment.value, vol_err / vol)
    per_width = tuple(v / (2 * vol) for v in moment.per_width)
    est = Estimate(value, error, samples, tuple(widths), per_width, KAPPA_EXACT)
    if rel_tol is not None and not est.relative_error <= rel_tol:
        raise StatisticsError(f"relative error {est.relative_error:.3g} exceeds the requested {rel_tol:.3g}")
    return est


def measure_constant_check(
    lengths: EdgeLengths, samples: int, rng, *, triangle_samples: int | None = None, rel_tol=None
) -> MeasureReport:
    """Measure ``kappa`` at the exterior lengths of ``lengths`` and check
    ``mu_T(T) = 2A`` on its ten triangles."""
    simplex_V(lengths)  # realizability precondition
    verts = lengths.vertices
    relabel = dict(zip(verts, range(1, 6)))
    ext = {e: lengths[verts[e[0] - 1], verts[e[1] - 1]] for e in EXTERIOR}
    kappa = kappa_mc(ext, samples, rng, rel_tol=rel_tol)
    tri_n = triangle_samples or samples
    triangles = {}
    for a, b, c in itertools.combinations(verts, 3):
        triangles[relabel[a], relabel[b], relabel[c]] = triangle_measure_mc(
            lengths[a, b], lengths[b, c], lengths[a, c], tri_n, rng, rel_tol=rel_tol
        )
    return MeasureReport(kappa, KAPPA_EXACT, triangles)
