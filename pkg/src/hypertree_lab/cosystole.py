"""Weighted F_2 cochain norms, cosystoles and the expansion quotient at tiny n.

A face's weight is the number of triangles containing it over
C(3, i+1) |K(2)|, so the i-faces carry total weight 1. All norms are exact
Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable

import numpy as np

from .dpp import build_kernel, sample_stream
from .faces import Complex2, Hypertree, cycle_edges, edge_rank, triangle_edges
from .homology import valid_cycles
from .linalg import gf2_nullspace

COSET_MAX_N = 16
SYSTOLE_MAX_DIM = 24
EPSILON_MAX_N = 6
_LOW_BITS = 16


def _base(T) -> Complex2:
    return T.base if isinstance(T, Hypertree) else T


def face_weights(T, i: int) -> tuple:
    """(integer numerators by colex rank, common denominator) of the i-face weights."""
    C = _base(T)
    if i not in (0, 1):
        raise ValueError("only i in {0, 1} is supported")
    top = len(C.triangles)
    denom = comb(3, i + 1) * top
    if i == 1:
        return C.edge_degrees().astype(np.int64), denom
    counts = np.zeros(C.n, dtype=np.int64)
    for t in C.triangles:
        for v in t:
            counts[v - 1] += 1
    return counts, denom


def _support_indices(T, f: Iterable, i: int) -> list:
    n = _base(T).n
    idx = []
    for face in f:
        if i == 0:
            v = face[0] if isinstance(face, tuple) else face
            if isinstance(face, tuple) and len(face) != 1:
                raise ValueError(f"{face} is not a vertex")
            if not 1 <= v <= n:
                raise ValueError(f"vertex {v} outside [1, {n}]")
            idx.append(v - 1)
        else:
            if np.isscalar(face) or len(face) != 2:
                raise ValueError(f"{face} is not an edge")
            a, b = sorted(face)
            if a < 1 or b > n or a == b:
                raise ValueError(f"bad edge {face}")
            idx.append(edge_rank(a, b))
    return sorted(set(idx))


def cochain_norm(T, f: Iterable, i: int) -> Fraction:
    """||f|| = sum of weights over the support of f."""
    num, denom = face_weights(T, i)
    idx = _support_indices(T, f, i)
    return Fraction(int(num[idx].sum()) if idx else 0, denom)


# ---------------------------------------------------------------- Z^1 = B^1 + H

def _coboundary_rows(C: Complex2) -> list:
    te = triangle_edges(C.n)[list(C.ranks)]
    rows = []
    for a, b, c in te:
        rows.append((1 << int(a)) | (1 << int(b)) | (1 << int(c)))
    return rows


def vertex_stars(n: int) -> list:
    """Bitmasks of the coboundaries of vertices 1..n-1 (a basis of B^1)."""
    stars = []
    for v in range(1, n):
        mask = 0
        for u in range(1, n + 1):
            if u != v:
                mask |= 1 << edge_rank(min(u, v), max(u, v))
        stars.append(mask)
    return stars


@dataclass(frozen=True)
class CocycleBasis:
    n: int
    coboundaries: tuple   # n-1 vertex stars
    harmonic: tuple       # lifts of a basis of H^1(., F_2)

    @property
    def dim(self) -> int:
        return len(self.coboundaries) + len(self.harmonic)


def cocycle_basis(T) -> CocycleBasis:
    """Split a basis of Z^1(T, F_2) into vertex stars plus harmonic lifts."""
    C = _base(T)
    n = C.n
    E = comb(n, 2)
    kernel = gf2_nullspace(_coboundary_rows(C), E)
    stars = vertex_stars(n)
    reduced: dict = {}

    def insert(v: int) -> bool:
        while v:
            top = v.bit_length() - 1
            if top not in reduced:
                reduced[top] = v
                return True
            v ^= reduced[top]
        return False

    for s in stars:
        insert(s)
    harmonic = tuple(z for z in kernel if insert(z))
    return CocycleBasis(n, tuple(stars), harmonic)


def _bits(mask: int, E: int) -> np.ndarray:
    return np.array([(mask >> j) & 1 for j in range(E)], dtype=np.int64)


def _span_table(vectors: list, E: int) -> np.ndarray:
    table = np.zeros((1, E), dtype=np.int64)
    for v in vectors:
        table = np.vstack([table, table ^ _bits(v, E)])
    return table


def _min_over_span(offset: int, vectors: list, weights: np.ndarray) -> int:
    """min weight of offset + span(vectors) as an integer numerator."""
    E = len(weights)
    low, high = vectors[:_LOW_BITS], vectors[_LOW_BITS:]
    table = _span_table(low, E)
    base = table @ weights
    best = None
    for combo in range(1 << len(high)):
        o = offset
        for j, v in enumerate(high):
            if (combo >> j) & 1:
                o ^= v
        ob = _bits(o, E)
        vals = base + int(ob @ weights) - 2 * (table @ (weights * ob))
        m = int(vals.min())
        best = m if best is None else min(best, m)
    return best


def coset_norm(T, f: Iterable, i: int) -> Fraction:
    """min ||g|| over g in f + Z^i(T, F_2)."""
    C = _base(T)
    num, denom = face_weights(C, i)
    idx = _support_indices(C, f, i)
    if i == 0:
        ind = np.zeros(C.n, dtype=bool)
        ind[idx] = True
        return Fraction(int(min(num[ind].sum(), num[~ind].sum())), denom)
    if C.n > COSET_MAX_N:
        raise ValueError(f"coset_norm limited to n <= {COSET_MAX_N}")
    basis = cocycle_basis(C)
    offset = 0
    for j in idx:
        offset |= 1 << j
    vectors = list(basis.coboundaries) + list(basis.harmonic)
    return Fraction(_min_over_span(offset, vectors, num), denom)


def systole(T, mode: str = "upper"):
    """syst^1: min norm over cocycles that are not coboundaries (math.inf if none).

    "exact" enumerates Z^1 minus B^1; "upper" only looks at valid 5-cycles.
    """
    C = _base(T)
    num, denom = face_weights(C, 1)
    if mode == "upper":
        cycles = valid_cycles(C)
        if not cycles:
            return math.inf
        return min(cochain_norm(C, cycle_edges(c), 1) for c in cycles)
    if mode != "exact":
        raise ValueError(f"unknown systole mode {mode!r}")
    basis = cocycle_basis(C)
    if basis.dim > SYSTOLE_MAX_DIM:
        raise ValueError(f"exact systole needs dim Z^1 <= {SYSTOLE_MAX_DIM}, got {basis.dim}")
    d = len(basis.harmonic)
    if d == 0:
        return math.inf
    best = None
    stars = list(basis.coboundaries)
    for combo in range(1, 1 << d):
        o = 0
        for j, v in enumerate(basis.harmonic):
            if (combo >> j) & 1:
                o ^= v
        m = _min_over_span(o, stars, num)
        best = m if best is None else min(best, m)
    return Fraction(best, denom)


# ---------------------------------------------------------------- expansion quotient

def _all_sums(images: list) -> np.ndarray:
    """XOR of images over every subset, indexed by subset bitmask."""
    out = np.zeros(1, dtype=np.int64)
    for v in images:
        out = np.concatenate([out, out ^ v])
    return out


def _all_weight_sums(w: np.ndarray) -> np.ndarray:
    out = np.zeros(1, dtype=np.int64)
    for x in w:
        out = np.concatenate([out, out + int(x)])
    return out


def epsilon_tilde(T, i: int) -> Fraction:
    """min over f outside Z^i of ||delta f|| / ||f + Z^i||, by full enumeration."""
    C = _base(T)
    n = C.n
    if n > EPSILON_MAX_N:
        raise ValueError(f"epsilon_tilde limited to n <= {EPSILON_MAX_N}")
    if i not in (0, 1):
        raise ValueError("only i in {0, 1} is supported")
    w_num, w_den = face_weights(C, i)
    if i == 0:
        # delta of a vertex = its star; its norm uses the edge weights
        images = [sum(1 << edge_rank(min(u, v), max(u, v)) for u in range(1, n + 1) if u != v)
                  for v in range(1, n + 1)]
        target_num, target_den = face_weights(C, 1)
        zero_cycles = [0, (1 << n) - 1]
    else:
        te = triangle_edges(n)[list(C.ranks)]
        images = []
        for e in range(comb(n, 2)):
            mask = 0
            for j, tri in enumerate(te):
                if e in tri:
                    mask |= 1 << j
            images.append(mask)
        target_num = np.ones(len(te), dtype=np.int64)
        target_den = len(te)
        basis = cocycle_basis(C)
        zero_cycles = list(_all_sums(list(basis.coboundaries) + list(basis.harmonic)))
    delta = _all_sums(images)
    norms = _all_weight_sums(w_num)
    idx = np.arange(len(norms))
    coset = norms.copy()
    for z in zero_cycles:
        coset = np.minimum(coset, norms[idx ^ int(z)])
    # numerator of ||delta f|| in units of 1/target_den
    tw = np.asarray(target_num, dtype=np.int64)
    delta_num = np.zeros(len(delta), dtype=np.int64)
    for j, wj in enumerate(tw):
        delta_num += ((delta >> j) & 1) * wj
    best = None
    for f in np.flatnonzero(delta != 0):
        val = Fraction(int(delta_num[f]) * w_den, int(coset[f]) * target_den)
        if best is None or val < best:
            best = val
    return best


# ---------------------------------------------------------------- small-systole event

def cycle_norm_value(n: int) -> Fraction:
    """Norm of a valid 5-cycle on a hypertree: 10 edge-triangle incidences."""
    return Fraction(20, 3 * (n - 1) * (n - 2))


def seven_over_n2_threshold(limit: int = 10**4) -> int:
    """Smallest n >= 4 from which 20/(3(n-1)(n-2)) <= 7/n^2 holds for good."""
    last_bad = 3
    for n in range(4, limit):
        if cycle_norm_value(n) > Fraction(7, n * n):
            last_bad = n
    return last_bad + 1


@dataclass
class CosysEventStats:
    n: int
    trials: int
    seed: int
    rows: list = field(default_factory=list)  # (n, trial, num, den, event_7, X_positive)
    cycle_norm_mismatches: int = 0

    def freq(self, column: int) -> float:
        return sum(1 for r in self.rows if r[column]) / len(self.rows) if self.rows else 0.0

    @property
    def freq_event_7(self) -> float:
        return self.freq(4)

    @property
    def freq_X_positive(self) -> float:
        return self.freq(5)

    @property
    def freq_cycle_value(self) -> float:
        v = cycle_norm_value(self.n)
        hits = sum(1 for r in self.rows if r[3] and Fraction(r[2], r[3]) <= v)
        return hits / len(self.rows) if self.rows else 0.0

    @property
    def ordering_ok(self) -> bool:
        return self.freq_cycle_value >= self.freq_X_positive

    @property
    def threshold(self) -> int:
        return seven_over_n2_threshold()


def cosys_event_stats(n: int, trials: int, seed: int, kernel=None, samples=None,
                      method: str = "auto") -> CosysEventStats:
    """Per-trial systole upper bounds and the frequency of syst^1 <= 7/n^2."""
    if samples is None:
        K = kernel if kernel is not None else build_kernel(n)
        samples = sample_stream(K, seed, trials, method=method)
    stats = CosysEventStats(n, 0, seed)
    target = cycle_norm_value(n)
    for t, T in enumerate(samples):
        cycles = valid_cycles(T.base)
        if cycles:
            norms = [cochain_norm(T, cycle_edges(c), 1) for c in cycles]
            stats.cycle_norm_mismatches += sum(1 for v in norms if v != target)
            up = min(norms)
            row = (n, t, up.numerator, up.denominator, up <= Fraction(7, n * n), True)
        else:
            row = (n, t, 1, 0, False, False)
        stats.rows.append(row)
    stats.trials = len(stats.rows)
    return stats
