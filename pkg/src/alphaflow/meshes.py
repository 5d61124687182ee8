"""Small standard triangulations used by tests, examples and the CLI."""

from __future__ import annotations

from itertools import combinations

from .complex_core import TetComplex, WeightedSurface, build_surface, build_tet_complex


def tetrahedron_faces() -> list[tuple[int, int, int]]:
    return [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]


def octahedron_faces() -> list[tuple[int, int, int]]:
    # poles 0 and 5, equator 1-2-3-4
    eq = [1, 2, 3, 4]
    faces = []
    for k in range(4):
        a, b = eq[k], eq[(k + 1) % 4]
        faces.append((0, a, b))
        faces.append((5, b, a))
    return faces


def torus7_faces() -> list[tuple[int, int, int]]:
    """Minimal (Csaszar) 7-vertex torus; its 1-skeleton is K7."""
    faces = []
    for i in range(7):
        faces.append((i, (i + 1) % 7, (i + 3) % 7))
        faces.append((i, (i + 2) % 7, (i + 3) % 7))
    return faces


def grid_torus_faces(m: int, n: int) -> list[tuple[int, int, int]]:
    """Flat ``m x n`` grid with opposite sides identified (needs m, n >= 3)."""
    if m < 3 or n < 3:
        raise ValueError("grid torus needs m, n >= 3 to stay simplicial")

    def v(a, b):
        return (a % m) * n + (b % n)

    faces = []
    for a in range(m):
        for b in range(n):
            faces.append((v(a, b), v(a + 1, b), v(a + 1, b + 1)))
            faces.append((v(a, b), v(a + 1, b + 1), v(a, b + 1)))
    return faces


def boundary_4simplex_tets() -> list[tuple[int, int, int, int]]:
    return [tuple(t) for t in combinations(range(5), 4)]


def tetrahedron(weight: float = 0.0) -> WeightedSurface:
    return build_surface(4, tetrahedron_faces(), weight)


def octahedron(weight: float = 0.0) -> WeightedSurface:
    return build_surface(6, octahedron_faces(), weight)


def torus7(weight: float = 0.0) -> WeightedSurface:
    return build_surface(7, torus7_faces(), weight)


def grid_torus(m: int, n: int, weight: float = 0.0) -> WeightedSurface:
    return build_surface(m * n, grid_torus_faces(m, n), weight)


def boundary_4simplex() -> TetComplex:
    return build_tet_complex(5, boundary_4simplex_tets())


SURFACES = {
    "tetrahedron": tetrahedron,
    "octahedron": octahedron,
    "torus7": torus7,
}

TET_COMPLEXES = {
    "boundary_4simplex": boundary_4simplex,
}
