"""Brute-force ground truth for tiny n.

Everything here enumerates: all triangle subsets of size C(n-1, 2) for
n <= 6, all automorphisms of small abelian p-groups, and so on. It is slow
on purpose and shares no shortcuts with the code it checks.
"""

from __future__ import annotations

import itertools
import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .faces import CocycleGraph, Complex2, edge_hits, reduced_boundary
from .linalg import det_exact

ORACLE_NS = (4, 5, 6)
AUT_ORDER_CAP = 256


class SampleOutsideSupport(ValueError):
    """A sampled triangle set is not a hypertree."""


@dataclass
class HypertreePMF:
    """Every hypertree on [n] with |det|; P(T) = det^2 / n^C(n-2,2)."""

    n: int
    entries: list = field(default_factory=list)  # (sorted triangle ranks, |det|)

    @property
    def normalizer(self) -> int:
        return self.n ** comb(self.n - 2, 2)

    def det_square_sum(self) -> int:
        return sum(d * d for _, d in self.entries)

    def probabilities(self) -> list:
        return [Fraction(d * d, self.normalizer) for _, d in self.entries]

    def index(self) -> dict:
        return {ranks: i for i, (ranks, _) in enumerate(self.entries)}

    def save(self, path: os.PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(f"# n={self.n} normalizer={self.normalizer}\n")
            for ranks, d in self.entries:
                fh.write(" ".join(map(str, ranks)) + f"\t{d}\n")

    @classmethod
    def load(cls, path: os.PathLike) -> "HypertreePMF":
        with open(path) as fh:
            header = fh.readline()
            n = int(header.split("n=")[1].split()[0])
            entries = []
            for line in fh:
                ranks, d = line.rstrip("\n").split("\t")
                entries.append((tuple(int(r) for r in ranks.split()), int(d)))
        return cls(n, entries)


def _default_cache_dir() -> Path:
    return Path(os.environ.get("HYPERTREE_CACHE", Path.home() / ".cache" / "hypertree_lab"))


def enumerate_hypertrees(n: int, cache_dir: Optional[os.PathLike] = None,
                         use_cache: bool = True) -> HypertreePMF:
    """Scan all C(C(n,3), C(n-1,2)) triangle sets, keep the nonsingular ones."""
    if n not in ORACLE_NS:
        raise ValueError(f"oracle enumeration supports n in {ORACLE_NS}, got {n}")
    path = Path(cache_dir or _default_cache_dir()) / f"pmf_n{n}.txt"
    if use_cache and path.exists():
        return HypertreePMF.load(path)

    A = reduced_boundary(n).astype(np.float64)
    r, m = A.shape
    combos = np.array(list(itertools.combinations(range(m), r)), dtype=np.int64)
    entries = []
    for start in range(0, len(combos), 20000):
        chunk = combos[start:start + 20000]
        mats = np.transpose(A[:, chunk], (1, 0, 2))
        dets = np.linalg.det(mats)
        rounded = np.rint(dets)
        # entries are +-1, so |det| <= 3^(r/2); anything off-integer goes exact
        shaky = np.abs(dets - rounded) > 1e-6
        for j in np.flatnonzero(shaky | (rounded != 0)):
            cols = chunk[j]
            d = int(rounded[j])
            if shaky[j]:
                d = det_exact(A[:, cols].astype(np.int64))
            if d:
                entries.append((tuple(int(c) for c in cols), abs(d)))
    pmf = HypertreePMF(n, entries)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            pmf.save(path)
        except OSError:
            pass
    return pmf


def goodness_of_fit(pmf: HypertreePMF, samples: Iterable) -> tuple:
    """Pearson chi-square of sampled hypertrees against the exact pmf.

    Bins with expected count below 5 are pooled. Returns (statistic, p-value, dof);
    raises ValueError when pooling leaves a single bin.
    """
    index = pmf.index()
    counts = Counter()
    total = 0
    for s in samples:
        ranks = tuple(s.ranks) if hasattr(s, "ranks") else tuple(sorted(s))
        i = index.get(ranks)
        if i is None:
            raise SampleOutsideSupport(f"sampled set {ranks} is not a hypertree")
        counts[i] += 1
        total += 1
    probs = np.array([float(p) for p in pmf.probabilities()])
    expected = probs * total
    observed = np.array([counts[i] for i in range(len(probs))], dtype=float)
    small = expected < 5
    obs_bins = list(observed[~small])
    exp_bins = list(expected[~small])
    if small.any():
        obs_bins.append(observed[small].sum())
        exp_bins.append(expected[small].sum())
    obs_bins, exp_bins = np.array(obs_bins), np.array(exp_bins)
    stat = float(((obs_bins - exp_bins) ** 2 / exp_bins).sum())
    dof = len(obs_bins) - 1
    if dof < 1:
        raise ValueError(f"{total} samples leave no degrees of freedom after pooling")
    return stat, float(stats.chi2.sf(stat, dof)), dof


def brute_prob_cocycle(n: int, G: CocycleGraph, pmf: Optional[HypertreePMF] = None) -> Fraction:
    """P(G in Z^1(T_n, F_2)) by summing det^2 over enumerated hypertrees."""
    if n not in ORACLE_NS:
        raise ValueError(f"brute_prob_cocycle supports n in {ORACLE_NS}, got {n}")
    pmf = pmf or enumerate_hypertrees(n)
    hits = edge_hits(n, G.mask())
    good = 0
    for ranks, d in pmf.entries:
        if np.all(hits[list(ranks)] % 2 == 0):
            good += d * d
    return Fraction(good, pmf.normalizer)


# ---------------------------------------------------------------- automorphisms

@lru_cache(maxsize=None)
def _group_tables(exps: tuple, p: int):
    mods = [p**e for e in exps]
    elems = list(itertools.product(*[range(q) for q in mods]))
    index = {g: i for i, g in enumerate(elems)}
    N = len(elems)
    add = np.empty((N, N), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            add[i, j] = index[tuple((x + y) % q for x, y, q in zip(a, b, mods))]
    order = np.empty(N, dtype=np.int64)
    for i in range(N):
        k, cur = 1, i
        while cur != 0:
            cur = add[cur, i]
            k += 1
        order[i] = k
    return add, order


def brute_aut_count(exponents: Sequence[int], p: int) -> int:
    """|Aut| of Z/p^e1 x ... x Z/p^ek by exhaustive search over generator images.

    The image of the i-th generator must be killed by p^ei and must enlarge the
    subgroup spanned so far by exactly p^ei; a tuple of images is an
    automorphism iff these checks pass at every step. Images in the same coset
    of the current subgroup lead to the same next subgroup, so the search
    memoizes on that subgroup.
    """
    exps = tuple(sorted(int(e) for e in exponents if int(e) > 0))
    if p ** sum(exps) > AUT_ORDER_CAP:
        raise ValueError(f"group order exceeds cap {AUT_ORDER_CAP}")
    if not exps:
        return 1
    add, order = _group_tables(exps, p)
    N = add.shape[0]
    gen_orders = [p**e for e in exps]

    def span(S: frozenset, x: int) -> frozenset:
        out = set(S)
        cur = x
        while cur != 0:
            out.update(int(v) for v in add[cur, list(S)])
            cur = add[cur, x]
        return frozenset(out)

    @lru_cache(maxsize=None)
    def count(S: frozenset, i: int) -> int:
        if i == len(exps):
            return 1
        need = gen_orders[i]
        seen = set()
        total = 0
        Slist = list(S)
        for x in range(N):
            if x in seen:
                continue
            coset = [int(v) for v in add[x, Slist]]
            seen.update(coset)
            good = sum(1 for y in coset if need % order[y] == 0)
            if not good:
                continue
            S2 = span(S, x)
            if len(S2) != len(S) * need:
                continue
            total += good * count(S2, i + 1)
        return total

    return count(frozenset([0]), 0)
