"""Faces, boundary matrices and 5-cycle families on the vertex set [n].

Faces are sorted tuples of 1-based vertices. Every matrix in the package
indexes faces by colexicographic rank, so the first C(n-1, k) faces of size
k are exactly the faces avoiding vertex n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial, prod
from typing import Iterable, Iterator, Sequence

import numpy as np

Face = tuple


def check_face(face: Sequence[int], n: int) -> tuple:
    t = tuple(face)
    if len(t) not in (2, 3):
        raise ValueError(f"face must have 2 or 3 vertices, got {t}")
    if any(a >= b for a, b in zip(t, t[1:])):
        raise ValueError(f"face vertices must be strictly increasing: {t}")
    if t[0] < 1 or t[-1] > n:
        raise ValueError(f"face {t} not inside [1, {n}]")
    return t


def edge_rank(a: int, b: int) -> int:
    """Colex rank of the edge {a < b}."""
    return (b - 1) * (b - 2) // 2 + a - 1


def triangle_rank(a: int, b: int, c: int) -> int:
    """Colex rank of the triangle {a < b < c}."""
    return (c - 1) * (c - 2) * (c - 3) // 6 + (b - 1) * (b - 2) // 2 + a - 1


def face_rank(face: Sequence[int]) -> int:
    if len(face) == 2:
        return edge_rank(*face)
    if len(face) == 3:
        return triangle_rank(*face)
    if len(face) == 1:
        return face[0] - 1
    raise ValueError(f"unsupported face size {len(face)}")


@lru_cache(maxsize=None)
def faces(n: int, k: int) -> tuple:
    """All k-element subsets of [n] in colex order."""
    combos = itertools.combinations(range(1, n + 1), k)
    return tuple(sorted(combos, key=lambda t: t[::-1]))


@lru_cache(maxsize=None)
def face_index(n: int, k: int) -> dict:
    return {f: i for i, f in enumerate(faces(n, k))}


@lru_cache(maxsize=None)
def triangle_edges(n: int) -> np.ndarray:
    """Edge ranks of the boundary of every triangle, shape (C(n,3), 3).

    Column i holds the edge obtained by dropping the i-th smallest vertex, so
    its boundary sign is (-1)**i.
    """
    out = np.empty((comb(n, 3), 3), dtype=np.int64)
    for j, (a, b, c) in enumerate(faces(n, 3)):
        out[j] = (edge_rank(b, c), edge_rank(a, c), edge_rank(a, b))
    out.setflags(write=False)
    return out


_SIGNS = np.array([1, -1, 1], dtype=np.int8)


def boundary_matrix(n: int, d: int) -> np.ndarray:
    """Signed boundary matrix indexed by C([n], d) x C([n], d+1)."""
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")
    if n < d + 2:
        raise ValueError(f"need n >= {d + 2}, got {n}")
    if d == 1:
        J = np.zeros((n, comb(n, 2)), dtype=np.int8)
        for j, (a, b) in enumerate(faces(n, 2)):
            J[b - 1, j] = 1
            J[a - 1, j] = -1
        return J
    m = comb(n, 3)
    J = np.zeros((comb(n, 2), m), dtype=np.int8)
    cols = np.arange(m)
    te = triangle_edges(n)
    for i in range(3):
        J[te[:, i], cols] = _SIGNS[i]
    return J


def reduced_boundary(n: int) -> np.ndarray:
    """Rows of the 2-boundary indexed by edges inside [n-1]."""
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    return boundary_matrix(n, 2)[: comb(n - 1, 2)]


@dataclass(frozen=True)
class Complex2:
    """Pure 2-complex on [n] with implicit complete 1-skeleton."""

    n: int
    triangles: frozenset

    def __post_init__(self):
        for t in self.triangles:
            if len(t) != 3:
                raise ValueError(f"not a triangle: {t}")
            check_face(t, self.n)

    @classmethod
    def from_ranks(cls, n: int, ranks: Iterable[int]) -> "Complex2":
        tri = faces(n, 3)
        return cls(n, frozenset(tri[r] for r in ranks))

    @property
    def ranks(self) -> tuple:
        return tuple(sorted(triangle_rank(*t) for t in self.triangles))

    def mask(self) -> np.ndarray:
        out = np.zeros(comb(self.n, 3), dtype=bool)
        out[list(self.ranks)] = True
        return out

    def edge_degrees(self) -> np.ndarray:
        """Number of triangles containing each edge, indexed by edge rank."""
        te = triangle_edges(self.n)[list(self.ranks)]
        return np.bincount(te.ravel(), minlength=comb(self.n, 2))

    def __len__(self):
        return len(self.triangles)


@dataclass(frozen=True)
class Hypertree:
    """A 2-complex whose reduced boundary square submatrix is nonsingular.

    ``certificate`` is a prime q such that that submatrix has full rank mod q.
    """

    base: Complex2
    certificate: int

    def __post_init__(self):
        if len(self.base) != comb(self.base.n - 1, 2):
            raise ValueError("hypertree needs exactly C(n-1, 2) triangles")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def triangles(self) -> frozenset:
        return self.base.triangles

    @property
    def ranks(self) -> tuple:
        return self.base.ranks

    def matrix(self) -> np.ndarray:
        """The square matrix J^r[C(2)] (columns in colex order)."""
        return reduced_boundary(self.n)[:, list(self.ranks)]


@dataclass(frozen=True)
class CocycleGraph:
    """A graph on [n], read as the F_2 1-cochain with that support."""

    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"not an edge: {e}")
            check_face(e, self.n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "CocycleGraph":
        return cls(n, frozenset(tuple(sorted(e)) for e in edges))

    def mask(self) -> np.ndarray:
        out = np.zeros(comb(self.n, 2), dtype=bool)
        for e in self.edges:
            out[edge_rank(*e)] = True
        return out

    def relabel(self, perm: dict) -> "CocycleGraph":
        return CocycleGraph.from_edges(self.n, ((perm.get(a, a), perm.get(b, b)) for a, b in self.edges))


def cycle_edges(cycle: Sequence[int]) -> frozenset:
    k = len(cycle)
    return frozenset(tuple(sorted((cycle[j], cycle[(j + 1) % k]))) for j in range(k))


def cycle_triangles(cycle: Sequence[int]) -> frozenset:
    """The triangles {v_j, v_j+1, v_j+2} of a cycle (its F_2 slice)."""
    k = len(cycle)
    return frozenset(tuple(sorted((cycle[j], cycle[(j + 1) % k], cycle[(j + 2) % k]))) for j in range(k))


def canonical_cycle(cycle: Sequence[int]) -> tuple:
    """Root at the minimal vertex, oriented so the second vertex is below the last."""
    k = len(cycle)
    i = min(range(k), key=lambda j: cycle[j])
    c = tuple(cycle[i:]) + tuple(cycle[:i])
    if c[1] > c[-1]:
        c = (c[0],) + c[1:][::-1]
    return c


@dataclass(frozen=True)
class CycleFamily:
    """h vertex-disjoint 5-cycles; ``grid[i][j]`` is v_{i+1, j}."""

    n: int
    grid: tuple

    def __post_init__(self):
        flat = [v for row in self.grid for v in row]
        if any(len(row) != 5 for row in self.grid):
            raise ValueError("every cycle needs 5 vertices")
        if len(set(flat)) != len(flat):
            raise ValueError("cycle vertices must be pairwise distinct")
        if flat and (min(flat) < 1 or max(flat) > self.n):
            raise ValueError(f"vertices must lie in [1, {self.n}]")

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "CycleFamily":
        return cls(n, tuple(tuple(c) for c in cycles))

    @property
    def h(self) -> int:
        return len(self.grid)

    @property
    def vertices(self) -> frozenset:
        return frozenset(v for row in self.grid for v in row)

    def canonical(self) -> "CycleFamily":
        cycles = sorted(canonical_cycle(c) for c in self.grid)
        return CycleFamily(self.n, tuple(cycles))

    def graph(self) -> CocycleGraph:
        return CocycleGraph(self.n, frozenset().union(*(cycle_edges(c) for c in self.grid)))

    def f2(self) -> frozenset:
        return frozenset().union(*(cycle_triangles(c) for c in self.grid))

    def relabel(self, perm: dict) -> "CycleFamily":
        return CycleFamily(self.n, tuple(tuple(perm.get(v, v) for v in row) for row in self.grid))


@dataclass(frozen=True)
class FaceClassification:
    """Triangles of [n] split by how many boundary edges lie in a graph."""

    F0: frozenset
    F1: frozenset
    F2: frozenset
    F3: frozenset
    F2_slices: tuple = field(default=())

    def level(self, k: int) -> frozenset:
        return (self.F0, self.F1, self.F2, self.F3)[k]

    def counts(self) -> tuple:
        return tuple(len(self.level(k)) for k in range(4))


def edge_hits(n: int, graph_mask: np.ndarray) -> np.ndarray:
    """|boundary(sigma) & E(G)| for every triangle, by colex rank."""
    return graph_mask[triangle_edges(n)].sum(axis=1)


def classify_faces(G) -> FaceClassification:
    """Partition all triangles by overlap with a graph or cycle family."""
    family = G if isinstance(G, CycleFamily) else None
    graph = family.graph() if family is not None else G
    n = graph.n
    hits = edge_hits(n, graph.mask())
    tri = faces(n, 3)
    levels = [frozenset(tri[j] for j in np.flatnonzero(hits == k)) for k in range(4)]
    slices = ()
    if family is not None:
        slices = tuple(cycle_triangles(c) for c in family.grid)
    return FaceClassification(*levels, F2_slices=slices)


def family_count(n: int, h: int) -> int:
    """Closed-form |G_{n,h}|: ordered vertex choices over 10^h h!."""
    if 5 * h > n:
        return 0
    return prod(n - i for i in range(5 * h)) // (10**h * factorial(h))


def enumerate_cycle_families(n: int, h: int) -> Iterator[CycleFamily]:
    """Yield each graph of h vertex-disjoint 5-cycles on [n] exactly once.

    Representatives are canonical: each cycle starts at its minimal vertex
    with second vertex below the last, and cycles are sorted by minimal vertex.
    """
    if 5 * h > n:
        return

    def extend(prefix: tuple, used: frozenset, lowest: int):
        if len(prefix) == h:
            yield CycleFamily(n, prefix)
            return
        remaining = h - len(prefix)
        for root in range(lowest, n + 1):
            if root in used:
                continue
            avail = [v for v in range(root + 1, n + 1) if v not in used]
            if len(avail) + 1 < 5 * remaining:
                break
            for quad in itertools.permutations(avail, 4):
                if quad[0] > quad[3]:
                    continue
                cyc = (root,) + quad
                yield from extend(prefix + (cyc,), used | set(cyc), root + 1)

    yield from extend((), frozenset(), 1)


def family_components(F: CycleFamily) -> tuple:
    """The single-cycle graphs G_i and their union G."""
    parts = [CocycleGraph(F.n, cycle_edges(c)) for c in F.grid]
    union = CocycleGraph(F.n, frozenset().union(*(g.edges for g in parts)))
    return parts, union


def avoid_last_vertex(F: CycleFamily) -> tuple:
    """Relabel so vertex n is unused; returns (family, permutation)."""
    n = F.n
    if n not in F.vertices:
        return F, {}
    free = [v for v in range(1, n) if v not in F.vertices]
    if not free:
        raise ValueError("family uses every vertex; cannot free vertex n")
    perm = {n: free[-1], free[-1]: n}
    return F.relabel(perm), perm
