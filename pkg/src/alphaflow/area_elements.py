"""Per-vertex area elements ``A_i`` used by the A-flow.

A selector is any callable ``selector(surface, r) -> ndarray`` returning one
positive value per vertex.  The Voronoi/Delaunay area element is not
provided; a new selector only has to follow this calling convention and be
registered in :data:`SELECTORS`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex_core import WeightedSurface
from .errors import AreaElementFailure, ConfigError, DegenerateTriangle, DualPointOutside
from .packing2d import as_radii, edge_lengths, face_areas


def area_third(surface: WeightedSurface, r) -> np.ndarray:
    """A third of the area of every incident triangle."""
    areas = face_areas(surface, r)
    return np.bincount(surface.faces.ravel(), np.repeat(areas / 3.0, 3), minlength=surface.vertex_count)


def planar_face(lo: np.ndarray) -> np.ndarray:
    """Counter-clockwise planar corners for triangles with opposite sides ``lo`` [F, 3].

    Corner 0 sits at the origin and corner 1 on the positive x-axis.
    """
    l0, l1, l2 = lo[:, 0], lo[:, 1], lo[:, 2]
    x2 = (l1 * l1 + l2 * l2 - l0 * l0) / (2.0 * l2)
    y2 = np.sqrt(np.maximum(l1 * l1 - x2 * x2, 0.0))
    P = np.zeros(lo.shape[:1] + (3, 2))
    P[:, 1, 0] = l2
    P[:, 2, 0] = x2
    P[:, 2, 1] = y2
    return P


def radical_center(P: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Point of equal power with respect to the three circles of each face."""
    d1 = P[:, 1] - P[:, 0]
    d2 = P[:, 2] - P[:, 0]
    p0 = np.sum(P[:, 0] ** 2, axis=1) - radii[:, 0] ** 2
    b1 = np.sum(P[:, 1] ** 2, axis=1) - radii[:, 1] ** 2 - p0
    b2 = np.sum(P[:, 2] ** 2, axis=1) - radii[:, 2] ** 2 - p0
    M = 2.0 * np.stack([d1, d2], axis=1)
    try:
        return np.linalg.solve(M, np.stack([b1, b2], axis=1)[..., None])[..., 0]
    except np.linalg.LinAlgError:
        raise DegenerateTriangle("a face has collinear corners; no radical center") from None


def _project(O, A, B):
    d = B - A
    t = np.sum((O - A) * d, axis=1) / np.sum(d * d, axis=1)
    return A + t[:, None] * d


def _shoelace(*pts) -> np.ndarray:
    total = 0.0
    for k in range(len(pts)):
        a, b = pts[k], pts[(k + 1) % len(pts)]
        total = total + a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return 0.5 * total


def dual_corner_cells(surface: WeightedSurface, r, tol: float = 1e-12) -> np.ndarray:
    """Area of each corner's share of its face, shape [F, 3].

    The share of corner ``a`` is the quadrilateral bounded by corner ``a``,
    the feet of the radical lines on its two edges, and the radical center.
    """
    r = as_radii(r)
    lo = edge_lengths(surface, r)[surface.face_edges]
    try:
        return planar_corner_cells(planar_face(lo), r[surface.faces], tol)
    except DualPointOutside as exc:
        f = exc.args[1]
        raise DualPointOutside(
            f"radical center of face {tuple(int(v) for v in surface.faces[f])} lies outside the triangle", f
        ) from None


def planar_corner_cells(P: np.ndarray, radii: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Corner cells of planar triangles ``P`` [F, 3, 2] carrying circles of ``radii`` [F, 3].

    Raises
    ------
    DualPointOutside
        If a radical center has a barycentric coordinate below ``-tol``;
        ``args[1]`` is the index of the first such triangle.
    """
    O = radical_center(P, radii)
    tri = _shoelace(P[:, 0], P[:, 1], P[:, 2])
    bary = np.stack(
        [
            _shoelace(O, P[:, 1], P[:, 2]),
            _shoelace(P[:, 0], O, P[:, 2]),
            _shoelace(P[:, 0], P[:, 1], O),
        ],
        axis=1,
    ) / tri[:, None]
    outside = np.any(bary < -tol, axis=1)
    if np.any(outside):
        f = int(np.flatnonzero(outside)[0])
        raise DualPointOutside(f"radical center of triangle {f} lies outside it", f)

    cells = np.empty(P.shape[:2])
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        fb = _project(O, P[:, a], P[:, b])
        fc = _project(O, P[:, a], P[:, c])
        cells[:, a] = _shoelace(P[:, a], fb, O, fc)
    return cells


def area_dual_cell(surface: WeightedSurface, r) -> np.ndarray:
    cells = dual_corner_cells(surface, r)
    return np.bincount(surface.faces.ravel(), cells.ravel(), minlength=surface.vertex_count)


@dataclass(frozen=True)
class PowerRadius:
    alpha: float

    def __call__(self, surface, r):
        return as_radii(r) ** self.alpha

    def __str__(self):
        return f"power:{self.alpha:g}"


@dataclass(frozen=True)
class ThirdArea:
    def __call__(self, surface, r):
        return area_third(surface, r)

    def __str__(self):
        return "third"


@dataclass(frozen=True)
class DualCell:
    def __call__(self, surface, r):
        return area_dual_cell(surface, r)

    def __str__(self):
        return "dual"


SELECTORS = {"third": ThirdArea, "dual": DualCell}


def parse_selector(text: str):
    """``power:<alpha>``, ``third`` or ``dual``."""
    text = text.strip()
    if text.startswith("power:"):
        try:
            return PowerRadius(float(text.split(":", 1)[1]))
        except ValueError:
            raise ConfigError(f"bad exponent in area selector {text!r}") from None
    try:
        return SELECTORS[text]()
    except KeyError:
        raise ConfigError(f"unknown area selector {text!r}") from None


def evaluate(selector, surface, r) -> np.ndarray:
    A = np.asarray(selector(surface, r), dtype=float)
    if A.shape != (surface.vertex_count,) or not np.all(A > 0):
        raise AreaElementFailure(f"area element {selector} returned a nonpositive value")
    return A
