"""Circle packing geometry on a weighted triangulated surface.

All per-face arrays are indexed ``[face, corner]`` following the corner order
of ``surface.faces``; the edge opposite corner ``c`` is ``surface.face_edges[f, c]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complex_core import WeightedSurface
from .errors import DegenerateTriangle, NonpositiveRadius

TWO_PI = 2.0 * math.pi

# relative slack for the strict triangle inequality
_DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class PackingMetric:
    """Positive radius per vertex; ``u`` gives the log coordinates."""

    r: np.ndarray

    def __post_init__(self):
        r = as_radii(self.r)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_log(cls, u) -> "PackingMetric":
        return cls(np.exp(np.asarray(u, dtype=float)))

    @property
    def u(self) -> np.ndarray:
        return np.log(self.r)


def as_radii(r) -> np.ndarray:
    if isinstance(r, PackingMetric):
        return r.r
    r = np.asarray(r, dtype=float)
    if r.ndim != 1:
        raise ValueError("radii must be a 1-d vector")
    if not np.all(r > 0) or not np.all(np.isfinite(r)):
        raise NonpositiveRadius("radii must be finite and positive")
    return r


def _check_size(surface: WeightedSurface, r: np.ndarray) -> None:
    if r.shape != (surface.vertex_count,):
        raise ValueError(f"expected {surface.vertex_count} radii, got {r.shape[0]}")


@dataclass(frozen=True)
class CurvatureState:
    alpha: float
    lengths: np.ndarray
    angles: np.ndarray
    K: np.ndarray
    R_alpha: np.ndarray
    s_alpha: float
    K_av: float


def edge_lengths(surface: WeightedSurface, r) -> np.ndarray:
    """``l_ij = sqrt(r_i^2 + r_j^2 + 2 r_i r_j cos(Phi_ij))`` for every edge."""
    r = as_radii(r)
    _check_size(surface, r)
    ri = r[surface.edges[:, 0]]
    rj = r[surface.edges[:, 1]]
    return np.sqrt(ri * ri + rj * rj + 2.0 * ri * rj * np.cos(surface.weights))


def _angles_from_opposite(lo: np.ndarray) -> np.ndarray:
    """Corner angles of triangles given the side opposite each corner, shape [..., 3]."""
    total = lo.sum(axis=-1, keepdims=True)
    slack = total - 2.0 * lo  # l_b + l_c - l_a per corner
    if np.any(slack <= _DEGENERACY_RTOL * total):
        raise DegenerateTriangle("side lengths violate the strict triangle inequality")
    la = lo
    lb = np.roll(lo, -1, axis=-1)
    lc = np.roll(lo, -2, axis=-1)
    cos = (lb * lb + lc * lc - la * la) / (2.0 * lb * lc)
    if np.any(np.abs(cos) > 1.0 + 1e-9):
        raise DegenerateTriangle("law of cosines out of range")
    return np.arccos(np.clip(cos, -1.0, 1.0))


def inner_angles(l_a: float, l_b: float, l_c: float) -> tuple[float, float, float]:
    """Angles of a Euclidean triangle, each one opposite the matching side."""
    th = _angles_from_opposite(np.array([l_a, l_b, l_c], dtype=float))
    return float(th[0]), float(th[1]), float(th[2])


def face_angles(surface: WeightedSurface, r, lengths: np.ndarray | None = None) -> np.ndarray:
    if lengths is None:
        lengths = edge_lengths(surface, r)
    return _angles_from_opposite(lengths[surface.face_edges])


def gauss_curvature(surface: WeightedSurface, r) -> np.ndarray:
    """Angle deficit ``2 pi - sum of corner angles`` at each vertex."""
    th = face_angles(surface, r)
    return TWO_PI - np.bincount(surface.faces.ravel(), th.ravel(), minlength=surface.vertex_count)


def alpha_curvature(surface: WeightedSurface, r, alpha: float) -> np.ndarray:
    r = as_radii(r)
    return gauss_curvature(surface, r) / r**alpha


def s_alpha_2d(surface: WeightedSurface, r, alpha: float) -> float:
    r = as_radii(r)
    return TWO_PI * surface.euler_characteristic / float(np.sum(r**alpha))


def curvature_state(surface: WeightedSurface, r, alpha: float = 0.0) -> CurvatureState:
    r = as_radii(r)
    lengths = edge_lengths(surface, r)
    th = face_angles(surface, r, lengths)
    K = TWO_PI - np.bincount(surface.faces.ravel(), th.ravel(), minlength=surface.vertex_count)
    chi = surface.euler_characteristic
    return CurvatureState(
        alpha=float(alpha),
        lengths=lengths,
        angles=th,
        K=K,
        R_alpha=K / r**alpha,
        s_alpha=TWO_PI * chi / float(np.sum(r**alpha)),
        K_av=TWO_PI * chi / surface.vertex_count,
    )


def curvature_jacobian_u(surface: WeightedSurface, r) -> np.ndarray:
    """Analytic ``dK/du`` with ``u = ln r``.

    Chain rule through the per-face angle derivatives
    ``d(theta_a) = l_a/(2A) * (dl_a - cos(theta_c) dl_b - cos(theta_b) dl_c)``
    and ``d(l_ij)/d(u_i) = r_i (r_i + r_j cos Phi_ij) / l_ij``.
    """
    r = as_radii(r)
    _check_size(surface, r)
    faces = surface.faces
    lengths = edge_lengths(surface, r)
    lo = lengths[surface.face_edges]  # [F, 3], opposite each corner
    th = _angles_from_opposite(lo)
    cos_th = np.cos(th)
    area = 0.5 * lo[:, 1] * lo[:, 2] * np.sin(th[:, 0])

    nf = len(faces)
    # dtheta_a / dl_b
    D = np.empty((nf, 3, 3))
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        scale = lo[:, a] / (2.0 * area)
        D[:, a, a] = scale
        D[:, a, b] = -scale * cos_th[:, c]
        D[:, a, c] = -scale * cos_th[:, b]

    # dl_m / du_d, where l_m is opposite corner m
    cos_phi = np.cos(surface.weights[surface.face_edges])
    rv = r[faces]
    G = np.zeros((nf, 3, 3))
    for m in range(3):
        for d in range(3):
            if d == m:
                continue
            o = 3 - m - d
            G[:, m, d] = rv[:, d] * (rv[:, d] + rv[:, o] * cos_phi[:, m]) / lo[:, m]

    J = np.einsum("fab,fbd->fad", D, G)  # dtheta_corner / du_vertex
    n = surface.vertex_count
    L = np.zeros((n, n))
    rows = np.repeat(faces[:, :, None], 3, axis=2)
    cols = np.repeat(faces[:, None, :], 3, axis=1)
    np.add.at(L, (rows.ravel(), cols.ravel()), -J.ravel())
    return 0.5 * (L + L.T)


def face_areas(surface: WeightedSurface, r) -> np.ndarray:
    lo = edge_lengths(surface, r)[surface.face_edges]
    # Heron, in the factored form that is stable for thin triangles
    a, b, c = np.sort(lo, axis=1)[:, ::-1].T
    return 0.25 * np.sqrt((a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c)))
