"""Combinatorial structures for closed triangulated surfaces and 3-manifolds.

Vertices are 0-based integers.  Edges and triangles are stored as sorted
tuples; faces and tetrahedra keep the vertex order they were given in.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    BadWeight,
    ComplexError,
    DegenerateFace,
    DegenerateTet,
    DuplicateFace,
    DuplicateTet,
    EmptyOrFullSubset,
    EmptySubset,
    NonManifold,
)

HALF_PI = math.pi / 2


def edge_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True, eq=False)
class WeightedSurface:
    """Closed triangulated surface with an intersection angle on every edge.

    Attributes
    ----------
    vertex_count : int
    faces : ndarray, shape=[F, 3]
    edges : ndarray, shape=[E, 2]
        Sorted vertex pairs, in lexicographic order.
    weights : ndarray, shape=[E]
        Intersection angle of each edge, in ``[0, pi/2]``.
    face_edges : ndarray, shape=[F, 3]
        ``face_edges[f, c]`` is the index of the edge opposite corner ``c``.
    """

    vertex_count: int
    faces: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    edge_index: dict = field(repr=False)
    face_edges: np.ndarray = field(repr=False)
    vertex_faces: tuple = field(repr=False)
    vertex_edges: tuple = field(repr=False)

    @property
    def N(self) -> int:
        return self.vertex_count

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(f) for f in self.vertex_faces])

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - len(self.edges) + len(self.faces)

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[self.edge_index[edge_key(i, j)]])

    def weight_map(self) -> dict[tuple[int, int], float]:
        return {tuple(int(v) for v in e): float(w) for e, w in zip(self.edges, self.weights)}

    def neighbors(self, i: int) -> list[int]:
        out = []
        for e in self.vertex_edges[i]:
            a, b = self.edges[e]
            out.append(int(b if a == i else a))
        return sorted(out)


@dataclass(frozen=True, eq=False)
class TetComplex:
    """Closed triangulated 3-manifold (combinatorial data only)."""

    vertex_count: int
    tets: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    vertex_tets: tuple = field(repr=False)

    @property
    def N(self) -> int:
        return self.vertex_count

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - len(self.edges) + len(self.triangles) - len(self.tets)

    def neighbors(self, i: int) -> list[int]:
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(int(b))
            elif b == i:
                out.add(int(a))
        return sorted(out)


class LinkPair(NamedTuple):
    edge: tuple[int, int]
    vertex: int


@dataclass(frozen=True)
class Subcomplex:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    faces: tuple[tuple[int, int, int], ...]

    @property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)


def _check_indices(simplices: np.ndarray, vertex_count: int) -> None:
    if vertex_count <= 0:
        raise ComplexError("vertex_count must be positive")
    if simplices.size and (simplices.min() < 0 or simplices.max() >= vertex_count):
        raise ComplexError(f"vertex index out of range [0, {vertex_count})")


def build_surface(
    vertex_count: int,
    faces: Iterable[Sequence[int]],
    weights: Mapping[tuple[int, int], float] | float = 0.0,
) -> WeightedSurface:
    """Validate a face list and attach edge weights.

    ``weights`` maps unordered vertex pairs to angles; a bare number assigns
    the same angle to every edge.
    """
    faces = np.asarray([tuple(int(v) for v in f) for f in faces], dtype=np.int64)
    if faces.size == 0:
        raise ComplexError("face list is empty")
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise ComplexError("faces must be vertex triples")
    _check_indices(faces, vertex_count)

    seen = set()
    for f in faces:
        if len(set(f.tolist())) != 3:
            raise DegenerateFace(f"face {tuple(f.tolist())} repeats a vertex")
        key = tuple(sorted(f.tolist()))
        if key in seen:
            raise DuplicateFace(f"face {key} appears twice")
        seen.add(key)

    counts = Counter()
    for a, b, c in faces.tolist():
        for e in (edge_key(a, b), edge_key(b, c), edge_key(a, c)):
            counts[e] += 1
    bad = sorted(e for e, n in counts.items() if n != 2)
    if bad:
        raise NonManifold(f"edge {bad[0]} lies in {counts[bad[0]]} face(s); need exactly 2")
    used = {int(v) for v in faces.ravel()}
    if len(used) != vertex_count:
        missing = sorted(set(range(vertex_count)) - used)
        raise NonManifold(f"vertex {missing[0]} is in no face")

    edges = np.array(sorted(counts), dtype=np.int64)
    edge_index = {tuple(e): k for k, e in enumerate(edges.tolist())}

    if isinstance(weights, Mapping):
        normalized = {}
        for e, w in weights.items():
            key = edge_key(int(e[0]), int(e[1]))
            if key in normalized:
                raise BadWeight(f"weight for edge {key} given twice")
            normalized[key] = float(w)
        extra = set(normalized) - set(edge_index)
        if extra:
            raise BadWeight(f"weight given for non-edge {sorted(extra)[0]}")
        missing = [e for e in edge_index if e not in normalized]
        if missing:
            raise BadWeight(f"no weight for edge {missing[0]}")
        w = np.array([normalized[tuple(e)] for e in edges.tolist()])
    else:
        w = np.full(len(edges), float(weights))
    bad_w = ~((w >= 0.0) & (w <= HALF_PI))  # also catches NaN
    if bad_w.any():
        k = int(np.flatnonzero(bad_w)[0])
        raise BadWeight(f"weight {w[k]} on edge {tuple(edges[k])} outside [0, pi/2]")

    face_edges = np.empty_like(faces)
    vertex_faces = [[] for _ in range(vertex_count)]
    for f, (a, b, c) in enumerate(faces.tolist()):
        face_edges[f] = (edge_index[edge_key(b, c)], edge_index[edge_key(a, c)], edge_index[edge_key(a, b)])
        for v in (a, b, c):
            vertex_faces[v].append(f)
    vertex_edges = [[] for _ in range(vertex_count)]
    for k, (a, b) in enumerate(edges.tolist()):
        vertex_edges[a].append(k)
        vertex_edges[b].append(k)

    faces.setflags(write=False)
    edges.setflags(write=False)
    w.setflags(write=False)
    face_edges.setflags(write=False)
    return WeightedSurface(
        vertex_count=int(vertex_count),
        faces=faces,
        edges=edges,
        weights=w,
        edge_index=edge_index,
        face_edges=face_edges,
        vertex_faces=tuple(tuple(x) for x in vertex_faces),
        vertex_edges=tuple(tuple(x) for x in vertex_edges),
    )


def build_tet_complex(vertex_count: int, tets: Iterable[Sequence[int]]) -> TetComplex:
    tets = np.asarray([tuple(int(v) for v in t) for t in tets], dtype=np.int64)
    if tets.size == 0:
        raise ComplexError("tetrahedron list is empty")
    if tets.ndim != 2 or tets.shape[1] != 4:
        raise ComplexError("tetrahedra must be vertex quadruples")
    _check_indices(tets, vertex_count)

    seen = set()
    for t in tets.tolist():
        if len(set(t)) != 4:
            raise DegenerateTet(f"tetrahedron {tuple(t)} repeats a vertex")
        key = tuple(sorted(t))
        if key in seen:
            raise DuplicateTet(f"tetrahedron {key} appears twice")
        seen.add(key)

    tri_counts = Counter()
    edge_set = set()
    for t in tets.tolist():
        s = sorted(t)
        for tri in combinations(s, 3):
            tri_counts[tri] += 1
        edge_set.update(combinations(s, 2))
    bad = sorted(t for t, n in tri_counts.items() if n != 2)
    if bad:
        raise NonManifold(f"triangle {bad[0]} lies in {tri_counts[bad[0]]} tetrahedra; need exactly 2")
    used = {int(v) for v in tets.ravel()}
    if len(used) != vertex_count:
        missing = sorted(set(range(vertex_count)) - used)
        raise NonManifold(f"vertex {missing[0]} is in no tetrahedron")

    triangles = np.array(sorted(tri_counts), dtype=np.int64)
    edges = np.array(sorted(edge_set), dtype=np.int64)
    chi = vertex_count - len(edges) + len(triangles) - len(tets)
    if chi != 0:
        raise NonManifold(f"Euler characteristic {chi} != 0; not a closed 3-manifold")

    vertex_tets = [[] for _ in range(vertex_count)]
    for k, t in enumerate(tets.tolist()):
        for v in t:
            vertex_tets[v].append(k)
    for a in (tets, triangles, edges):
        a.setflags(write=False)
    return TetComplex(
        vertex_count=int(vertex_count),
        tets=tets,
        triangles=triangles,
        edges=edges,
        vertex_tets=tuple(tuple(x) for x in vertex_tets),
    )


def euler_characteristic(cx: WeightedSurface | TetComplex) -> int:
    return cx.euler_characteristic


def _as_subset(surface: WeightedSurface, subset: Iterable[int]) -> frozenset[int]:
    s = frozenset(int(v) for v in subset)
    if any(v < 0 or v >= surface.vertex_count for v in s):
        raise ComplexError("subset contains a vertex outside the surface")
    return s


def link_pairs(surface: WeightedSurface, subset: Iterable[int]) -> list[LinkPair]:
    """Pairs ``(e, v)`` with ``v`` in the subset, ``e`` disjoint from it, spanning a face."""
    s = _as_subset(surface, subset)
    if not s or len(s) == surface.vertex_count:
        raise EmptyOrFullSubset("subset must be nonempty and proper")
    out = []
    for f in surface.faces.tolist():
        inside = [v for v in f if v in s]
        if len(inside) == 1:
            v = inside[0]
            a, b = (w for w in f if w != v)
            out.append(LinkPair(edge_key(a, b), v))
    out.sort()
    return out


def induced_subcomplex(surface: WeightedSurface, subset: Iterable[int]) -> tuple[Subcomplex, int]:
    """Full subcomplex spanned by ``subset`` and its Euler characteristic."""
    s = _as_subset(surface, subset)
    if not s:
        raise EmptySubset("subset must be nonempty")
    edges = tuple(tuple(int(v) for v in e) for e in surface.edges.tolist() if e[0] in s and e[1] in s)
    faces = tuple(tuple(sorted(f)) for f in surface.faces.tolist() if all(v in s for v in f))
    sub = Subcomplex(tuple(sorted(s)), edges, tuple(sorted(faces)))
    return sub, sub.euler_characteristic
