"""Sphere packing geometry on closed triangulated 3-manifolds.

Edge lengths are ``l_ij = r_i + r_j``.  Six-length vectors of a single
tetrahedron with local vertices 0..3 are ordered
``(l01, l02, l03, l12, l13, l23)``.
"""

from __future__ import annotations

import math

import numpy as np

from .complex_core import TetComplex
from .errors import DegenerateTet, FDNearBoundary, InadmissibleMetric, NonpositiveRadius
from .packing2d import as_radii

FOUR_PI = 4.0 * math.pi

_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_PAIR_INDEX = {p: k for k, p in enumerate(_PAIRS)}
_PAIR_INDEX.update({(b, a): k for (a, b), k in list(_PAIR_INDEX.items())})
# for each vertex i: the other three vertices j < k < l
_OTHERS = [tuple(v for v in range(4) if v != i) for i in range(4)]


def nondegeneracy_Q(ri: float, rj: float, rk: float, rl: float) -> float:
    """``(sum 1/r)^2 - 2 sum 1/r^2``; positive iff the four balls span a Euclidean tetrahedron."""
    rs = (ri, rj, rk, rl)
    if not all(x > 0 for x in rs):
        raise NonpositiveRadius("radii must be positive")
    inv = [1.0 / x for x in rs]
    return sum(inv) ** 2 - 2.0 * sum(x * x for x in inv)


def tet_Q(cx: TetComplex, r) -> np.ndarray:
    r = as_radii(r)
    inv = 1.0 / r[cx.tets]
    return inv.sum(axis=1) ** 2 - 2.0 * (inv * inv).sum(axis=1)


def admissible_metric_check(cx: TetComplex, r) -> tuple[bool, list[tuple[int, ...]]]:
    """Whether every tetrahedron has ``Q > 0``, and the ones that do not."""
    Q = tet_Q(cx, r)
    bad = [tuple(int(v) for v in cx.tets[k]) for k in np.flatnonzero(~(Q > 0))]
    return not bad, bad


def require_admissible(cx: TetComplex, r) -> np.ndarray:
    r = as_radii(r)
    if r.shape != (cx.vertex_count,):
        raise ValueError(f"expected {cx.vertex_count} radii, got {r.shape[0]}")
    ok, bad = admissible_metric_check(cx, r)
    if not ok:
        raise InadmissibleMetric(f"{len(bad)} tetrahedra have Q <= 0, first {bad[0]}", bad)
    return r


def cayley_menger(lengths) -> np.ndarray:
    """``288 V^2`` for six-length vectors, shape [..., 6]."""
    L = np.asarray(lengths, dtype=float)
    d2 = L * L
    M = np.ones(L.shape[:-1] + (5, 5))
    M[..., 0, 0] = 0.0
    for k, (a, b) in enumerate(_PAIRS):
        M[..., a + 1, b + 1] = d2[..., k]
        M[..., b + 1, a + 1] = d2[..., k]
    for a in range(4):
        M[..., a + 1, a + 1] = 0.0
    return np.linalg.det(M)


def _face_angle_cosines(L: np.ndarray) -> np.ndarray:
    """Cosines of the face angles at each vertex, shape [..., 4, 3].

    For vertex ``i`` with others ``(j, k, l)`` the three entries are the
    angles ``jik``, ``jil``, ``kil`` (opposite the spherical sides at ``i``).
    """
    out = np.empty(L.shape[:-1] + (4, 3))
    for i in range(4):
        j, k, l = _OTHERS[i]
        for m, (a, b) in enumerate([(j, k), (j, l), (k, l)]):
            lia = L[..., _PAIR_INDEX[(i, a)]]
            lib = L[..., _PAIR_INDEX[(i, b)]]
            lab = L[..., _PAIR_INDEX[(a, b)]]
            out[..., i, m] = (lia * lia + lib * lib - lab * lab) / (2.0 * lia * lib)
    return np.clip(out, -1.0, 1.0)


def _check_nondegenerate(L: np.ndarray, rtol: float) -> None:
    cm = cayley_menger(L)
    scale = np.max(L, axis=-1) ** 6
    if np.any(~(cm > rtol * scale)):
        raise DegenerateTet("lengths do not span a nondegenerate Euclidean tetrahedron")


def solid_angles_lhuilier(lengths, rtol: float = 1e-12) -> np.ndarray:
    """Solid angle at each vertex from the face angles via L'Huilier's theorem."""
    L = np.asarray(lengths, dtype=float)
    _check_nondegenerate(L, rtol)
    a = np.arccos(_face_angle_cosines(L))
    s = 0.5 * a.sum(axis=-1)
    prod = np.tan(0.5 * s)
    for m in range(3):
        prod = prod * np.tan(0.5 * (s - a[..., m]))
    return 4.0 * np.arctan(np.sqrt(np.maximum(prod, 0.0)))


def solid_angles_dihedral(lengths, rtol: float = 1e-12) -> np.ndarray:
    """Solid angle at each vertex as (sum of the three dihedral angles there) - pi."""
    L = np.asarray(lengths, dtype=float)
    _check_nondegenerate(L, rtol)
    c = _face_angle_cosines(L)
    sn = np.sqrt(np.maximum(1.0 - c * c, 0.0))
    # the dihedral angle at an edge is the spherical angle opposite the
    # face angle not containing that edge
    total = 0.0
    for opp, (p, q) in ((2, (0, 1)), (1, (0, 2)), (0, (1, 2))):
        cos_beta = (c[..., opp] - c[..., p] * c[..., q]) / (sn[..., p] * sn[..., q])
        total = total + np.arccos(np.clip(cos_beta, -1.0, 1.0))
    return total - math.pi


def solid_angles(lengths) -> np.ndarray:
    return solid_angles_lhuilier(lengths)


def tet_lengths(cx: TetComplex, r) -> np.ndarray:
    rv = as_radii(r)[cx.tets]
    return np.stack([rv[:, a] + rv[:, b] for a, b in _PAIRS], axis=1)


def cr_curvature(cx: TetComplex, r) -> np.ndarray:
    """Solid-angle deficit ``4 pi - sum of solid angles`` at each vertex."""
    r = require_admissible(cx, r)
    ang = solid_angles_lhuilier(tet_lengths(cx, r), rtol=0.0)
    return FOUR_PI - np.bincount(cx.tets.ravel(), ang.ravel(), minlength=cx.vertex_count)


def alpha_curvature_3d(cx: TetComplex, r, alpha: float) -> np.ndarray:
    r = as_radii(r)
    return cr_curvature(cx, r) / r**alpha


def ehr_functional(cx: TetComplex, r) -> float:
    """Einstein-Hilbert-Regge functional ``sum_i K_i r_i``."""
    r = as_radii(r)
    return float(cr_curvature(cx, r) @ r)


def curvature_jacobian_r(cx: TetComplex, r, return_asymmetry: bool = False):
    """``dK/dr`` by central differences, symmetrized.

    With ``return_asymmetry`` also returns ``max|J - J^T|`` of the raw
    difference matrix.
    """
    r = require_admissible(cx, r)
    n = cx.vertex_count
    h = 1e-6 * np.maximum(1.0, r)
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h[j]
        rp, rm = r + e, r - e
        if not (np.all(rm > 0) and admissible_metric_check(cx, rp)[0] and admissible_metric_check(cx, rm)[0]):
            raise FDNearBoundary(f"difference step along r_{j} leaves the admissible region")
        J[:, j] = (cr_curvature(cx, rp) - cr_curvature(cx, rm)) / (2.0 * h[j])
    sym = 0.5 * (J + J.T)
    if return_asymmetry:
        return sym, float(np.max(np.abs(J - J.T)))
    return sym


def random_admissible_metric(cx: TetComplex, rng: np.random.Generator, low=0.5, high=2.0, max_tries=10_000):
    """Log-uniform radii in ``[low, high]``, resampled until admissible."""
    for _ in range(max_tries):
        r = np.exp(rng.uniform(math.log(low), math.log(high), cx.vertex_count))
        if admissible_metric_check(cx, r)[0]:
            return r
    raise RuntimeError("no admissible metric found; widen the sampling range")
