"""Shared constructions for the test suite."""

import numpy as np

from hypertree_lab.faces import (
    CocycleGraph,
    Complex2,
    Hypertree,
    classify_faces,
    cycle_edges,
    reduced_boundary,
    triangle_rank,
)

P = 2_147_483_647  # independence mod P implies independence over Q


class _Echelon:
    """Columns reduced mod P against the pivots accepted so far."""

    def __init__(self, r):
        self.rows = []
        self.piv = []

    def try_add(self, v):
        v = v % P
        for b, j in zip(self.rows, self.piv):
            if v[j]:
                v = (v - v[j] * b) % P
        nz = np.flatnonzero(v)
        if not len(nz):
            return False
        j = int(nz[0])
        self.rows.append(v * pow(int(v[j]), -1, P) % P)
        self.piv.append(j)
        return True


def planted_hypertrees(n, count, seed):
    """Hypertrees containing a pentagon's triangles, completed greedily from F0."""
    rng = np.random.default_rng(seed)
    A = reduced_boundary(n).astype(np.int64)
    r = A.shape[0]
    for _ in range(count):
        c = tuple(int(v) + 1 for v in rng.permutation(n - 1)[:5])
        fc = classify_faces(CocycleGraph.from_edges(n, cycle_edges(c)))
        cols = sorted(triangle_rank(*t) for t in fc.F2)
        ech = _Echelon(r)
        for t in cols:
            assert ech.try_add(A[:, t])
        for t in rng.permutation(sorted(triangle_rank(*t) for t in fc.F0)):
            if ech.try_add(A[:, int(t)]):
                cols.append(int(t))
            if len(cols) == r:
                break
        assert len(cols) == r
        yield Hypertree(Complex2.from_ranks(n, cols), 0)
