"""Cocycle tests, H_1 over F_p and Z, the 5-cycle census X_n, and Cohen-Lenstra references."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Optional, Sequence

import numpy as np

from .dpp import build_kernel, sample_stream
from .faces import (
    CocycleGraph,
    Complex2,
    Hypertree,
    canonical_cycle,
    edge_hits,
    faces,
    triangle_edges,
)
from .linalg import InvariantFactors, rank_mod_p, smith_diagonal, sylow_invariants

H1_GROUP_CAP = 10
CL_TRUNCATION = 60
RANK_PMF_KMAX = 40


def is_cocycle(C: Complex2, G: CocycleGraph) -> bool:
    """G is in Z^1(C, F_2) iff every triangle of C meets E(G) in 0 or 2 edges."""
    if C.n != G.n:
        raise ValueError("complex and graph live on different vertex sets")
    if not C.triangles:
        return True
    hits = edge_hits(C.n, G.mask())[list(C.ranks)]
    return bool(np.all(hits % 2 == 0))


def h1_dim(T: Hypertree, p: int) -> int:
    """dim H_1(T, F_p) = corank mod p of the square reduced boundary."""
    M = T.matrix()
    return M.shape[0] - rank_mod_p(M, p)


def h1_group(T: Hypertree, cap: int = H1_GROUP_CAP) -> InvariantFactors:
    """Full invariant factors of H_1(T, Z) via integer Smith form."""
    if T.n > cap:
        raise ValueError(f"h1_group limited to n <= {cap}, got n={T.n}")
    return InvariantFactors.from_diagonal(smith_diagonal(T.matrix()))


# ---------------------------------------------------------------- 5-cycles

def _third_vertices(C: Complex2) -> dict:
    """Map each edge to the third vertices of the triangles containing it."""
    third = defaultdict(list)
    for a, b, c in C.triangles:
        third[(b, c)].append(a)
        third[(a, c)].append(b)
        third[(a, b)].append(c)
    return third


def valid_cycles(C: Complex2) -> list:
    """All 5-cycles whose edge set is an F_2 cocycle of C, canonical and sorted.

    In a hypertree a 5-cycle v0..v4 is a cocycle exactly when each edge
    v_j v_j+1 lies in precisely the two triangles {v_j-1, v_j, v_j+1} and
    {v_j, v_j+1, v_j+2}, so it is enough to walk from edges of degree two.
    On other complexes only such chain-closed cocycles are listed.
    """
    third = _third_vertices(C)
    deg2 = {e: frozenset(t) for e, t in third.items() if len(t) == 2}

    def thirds(u, v):
        return deg2.get((u, v) if u < v else (v, u))

    found = set()
    for (a, b), xy in deg2.items():
        x0, y0 = tuple(xy)
        for x, y in ((x0, y0), (y0, x0)):
            by = thirds(b, y)
            if by is None or a not in by:
                continue
            (z,) = by - {a}
            if z in (x, a, b, y):
                continue
            if thirds(y, z) != {b, x} or thirds(z, x) != {y, a} or thirds(x, a) != {z, b}:
                continue
            found.add(canonical_cycle((x, a, b, y, z)))
    return sorted(found)


def _count_disjoint(cycles: Sequence[tuple], h: int) -> int:
    sets = [frozenset(c) for c in cycles]

    def rec(start: int, used: frozenset, left: int) -> int:
        if left == 0:
            return 1
        total = 0
        for i in range(start, len(sets)):
            if not (sets[i] & used):
                total += rec(i + 1, used | sets[i], left - 1)
        return total

    return rec(0, frozenset(), h)


def count_valid_cycles(T: Complex2 | Hypertree, h: int = 1) -> tuple:
    """(valid 5-cycles, X) where X counts h-sets of vertex-disjoint valid cycles."""
    base = T.base if isinstance(T, Hypertree) else T
    cycles = valid_cycles(base)
    return cycles, _count_disjoint(cycles, h)


# ---------------------------------------------------------------- Cohen-Lenstra

def _eta(p: int, terms: int = CL_TRUNCATION) -> float:
    return math.prod(1.0 - float(p) ** -j for j in range(1, terms + 1))


def cl_rank_pmf(p: int, k: int) -> float:
    """Limit law of dim H_1(., F_p) implied by the Cohen-Lenstra conjecture."""
    if k < 0:
        return 0.0
    inner = math.prod((1.0 - float(p) ** -j) ** -2 for j in range(1, k + 1))
    return float(p) ** (-k * k) * inner * _eta(p)


def cl_reference(p: int, mode: str, argument) -> float:
    """Cohen-Lenstra probability of a rank (mode "rank") or a p-group (mode "group").

    Groups are given as exponent lists: [1, 2] is Z/p x Z/p^2.
    """
    from .oracle import brute_aut_count

    if mode == "rank":
        return cl_rank_pmf(p, int(argument))
    if mode == "group":
        exps = sorted(int(e) for e in argument if int(e) > 0)
        if p ** sum(exps) > 256:
            raise ValueError("group mode limited to order <= 256")
        return _eta(p) / brute_aut_count(exps, p)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class ReferenceDistribution:
    p: int
    kmax: int = RANK_PMF_KMAX

    def rank_pmf(self) -> np.ndarray:
        return np.array([cl_rank_pmf(self.p, k) for k in range(self.kmax + 1)])

    def group_prob(self, exps: Sequence[int]) -> float:
        return cl_reference(self.p, "group", exps)


# ---------------------------------------------------------------- census

@dataclass
class TorsionReport:
    """dim H_1(., F_p) per sample, aggregated into an empirical pmf."""

    n: int
    p: int
    seed: int
    dims: list = field(default_factory=list)
    groups: list = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.dims)

    def merge(self, other: "TorsionReport") -> "TorsionReport":
        if (self.n, self.p) != (other.n, other.p):
            raise ValueError("cannot merge reports for different (n, p)")
        return TorsionReport(self.n, self.p, self.seed, self.dims + other.dims, self.groups + other.groups)

    def pmf(self) -> dict:
        counts = Counter(self.dims)
        return {k: counts[k] / self.trials for k in sorted(counts)}

    def stderr(self) -> dict:
        return {k: math.sqrt(q * (1 - q) / self.trials) for k, q in self.pmf().items()}

    def group_pmf(self) -> dict:
        counts = Counter(tuple(g) for g in self.groups)
        total = sum(counts.values())
        return {g: c / total for g, c in sorted(counts.items())}

    def tv_distance(self) -> float:
        ref = ReferenceDistribution(self.p).rank_pmf()
        emp = self.pmf()
        top = max(len(ref) - 1, max(emp, default=0))
        total = 0.0
        for k in range(top + 1):
            r = ref[k] if k < len(ref) else 0.0
            total += abs(emp.get(k, 0.0) - r)
        return 0.5 * total

    def rows(self) -> list:
        """(k, empirical_pmf, stderr, reference_pmf) for k = 0..max observed."""
        emp, se = self.pmf(), self.stderr()
        top = max(emp, default=0)
        return [(k, emp.get(k, 0.0), se.get(k, 0.0), cl_rank_pmf(self.p, k)) for k in range(top + 1)]


def census_from_samples(samples: Iterable[Hypertree], n: int, p: int, seed: int,
                        groups: bool = False) -> TorsionReport:
    rep = TorsionReport(n, p, seed)
    for T in samples:
        rep.dims.append(h1_dim(T, p))
        if groups:
            rep.groups.append(tuple(sylow_invariants(T.matrix(), p)))
    return rep


def torsion_census(n: int, p: int, trials: int, seed: int, groups: bool = False,
                   method: str = "auto", kernel=None) -> TorsionReport:
    """Sample ``trials`` hypertrees and tabulate dim H_1(., F_p)."""
    K = kernel if kernel is not None else build_kernel(n)
    return census_from_samples(sample_stream(K, seed, trials, method=method), n, p, seed, groups)


def cocycle_space_dim(C: Complex2) -> int:
    """dim Z^1(C, F_2) by direct kernel computation of the coboundary."""
    from .linalg import gf2_nullspace, pack_rows

    n = C.n
    te = triangle_edges(n)[list(C.ranks)]
    delta = np.zeros((len(te), comb(n, 2)), dtype=np.uint8)
    delta[np.arange(len(te))[:, None], te] = 1
    return len(gf2_nullspace(pack_rows(delta), comb(n, 2)))


def all_edges(n: int) -> tuple:
    return faces(n, 2)
