"""First and second moments of X_n, the number of 5-cycle-family cocycles.

The exact route: for a family G avoiding vertex n,

    P(G in Z^1(T_n, F_2)) = 4^h det(M_G) / n^C(n-2,2),
    M_G = J^r[E(Gbar), F_0] J^r[E(Gbar), F_0]^T,

where E(Gbar) are the edges inside [n-1] not used by G. The Monte Carlo
route samples hypertrees and counts valid cycles directly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Optional

import numpy as np
import scipy.linalg

from .dpp import ProjectionKernel, build_kernel, inclusion_prob, sample_stream
from .faces import (
    CycleFamily,
    avoid_last_vertex,
    boundary_matrix,
    classify_faces,
    cycle_edges,
    cycle_triangles,
    edge_rank,
    enumerate_cycle_families,
    family_count,
    reduced_boundary,
    triangle_rank,
)
from .homology import count_valid_cycles, h1_dim, is_cocycle
from .linalg import det_exact, sym_eigenvalues

EXACT_MAX_N = 8
OVERLAP_MAX_N = 12


def first_family(n: int, h: int) -> CycleFamily:
    """The family with cycles (1..5), (6..10), ..."""
    return CycleFamily(n, tuple(tuple(range(5 * i + 1, 5 * i + 6)) for i in range(h)))


@dataclass(frozen=True)
class GraphBlocks:
    """Row/column index sets of the cocycle-probability matrices for one family."""

    n: int
    family: CycleFamily
    rows: np.ndarray  # edge ranks of E(Gbar)
    F0: np.ndarray
    F12: np.ndarray

    def M(self) -> np.ndarray:
        return _gram(reduced_boundary(self.n)[np.ix_(self.rows, self.F0)])

    def N(self) -> np.ndarray:
        return _gram(boundary_matrix(self.n - 1, 1)[:, self.rows].T)

    def M_prime(self) -> np.ndarray:
        return _gram(reduced_boundary(self.n)[np.ix_(self.rows, self.F12)])


def _gram(B: np.ndarray) -> np.ndarray:
    """B B^T for a 0/+-1 matrix; float BLAS is exact since entries stay below n."""
    Bf = B.astype(np.float64)
    return np.rint(Bf @ Bf.T).astype(np.int64)


def graph_blocks(n: int, F: CycleFamily) -> GraphBlocks:
    if F.n != n:
        raise ValueError(f"family lives on [{F.n}], not [{n}]")
    F, _ = avoid_last_vertex(F)
    if n in F.vertices:
        raise RuntimeError("family still touches vertex n after relabeling")
    cls = classify_faces(F)
    used = {edge_rank(*e) for e in F.graph().edges}
    rows = np.array([e for e in range(comb(n - 1, 2)) if e not in used], dtype=np.int64)
    F0 = np.array(sorted(triangle_rank(*t) for t in cls.F0), dtype=np.int64)
    F12 = np.array(sorted(triangle_rank(*t) for t in cls.F1 | cls.F2), dtype=np.int64)
    return GraphBlocks(n, F, rows, F0, F12)


def logdet_spd(M: np.ndarray) -> float:
    """log det of a symmetric positive-definite matrix (Cholesky, eigen fallback)."""
    try:
        L = scipy.linalg.cholesky(np.asarray(M, dtype=float), lower=True)
        return 2.0 * math.fsum(np.log(np.diag(L)))
    except np.linalg.LinAlgError:
        ev = sym_eigenvalues(M)
        if ev.min() <= 0:
            raise ValueError("matrix is not positive definite")
        return math.fsum(np.log(ev))


@dataclass(frozen=True)
class CocycleProbability:
    log: float
    exact: Optional[Fraction] = None


def exact_prob_cocycle(n: int, F: CycleFamily, mode: str = "auto") -> CocycleProbability:
    """P(family graph is an F_2 cocycle of T_n) via the Cauchy-Binet identity."""
    if mode == "auto":
        mode = "exact" if n <= EXACT_MAX_N else "log"
    h = F.h
    M = graph_blocks(n, F).M()
    e = comb(n - 2, 2)
    if mode == "exact":
        val = Fraction(4**h * det_exact(M), n**e)
        lg = math.log(val.numerator) - math.log(val.denominator) if val else -math.inf
        return CocycleProbability(lg, val)
    if mode != "log":
        raise ValueError(f"unknown mode {mode!r}")
    return CocycleProbability(math.fsum([2 * h * math.log(2), logdet_spd(M), -e * math.log(n)]))


@dataclass(frozen=True)
class ExpectedX:
    n: int
    h: int
    family_count: int
    log_prob: float
    exact_prob: Optional[Fraction] = None

    @property
    def log_value(self) -> float:
        return math.log(self.family_count) + self.log_prob if self.family_count else -math.inf

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    @property
    def exact(self) -> Optional[Fraction]:
        if self.exact_prob is None:
            return None
        return self.family_count * self.exact_prob


def expected_X_exact(n: int, h: int = 1, mode: str = "auto") -> ExpectedX:
    """E X_n = |G_{n,h}| * P(one fixed family is a cocycle), by exchangeability."""
    count = family_count(n, h)
    if count == 0 or 5 * h >= n:
        return ExpectedX(n, h, count, -math.inf)
    p = exact_prob_cocycle(n, first_family(n, h), mode)
    return ExpectedX(n, h, count, p.log, p.exact)


def asymptotic_lower_bound_log(n: int, h: int = 1) -> float:
    """log of 4^h n^{-5h} e^{-80h}."""
    return 2 * h * math.log(2) - 5 * h * math.log(n) - 80 * h


# ---------------------------------------------------------------- Monte Carlo

def _z95() -> float:
    return 1.959963984540054


@dataclass
class MomentReport:
    n: int
    h: int
    trials: int
    seed: int
    exact_logEX: Optional[float] = None
    mc_EX: Optional[float] = None
    mc_EX2: Optional[float] = None
    mc_PXpos: Optional[float] = None
    se_EX: Optional[float] = None
    se_EX2: Optional[float] = None
    se_PXpos: Optional[float] = None
    pz_bound: Optional[float] = None
    se_pz: Optional[float] = None
    ci95_EX_lo: Optional[float] = None
    ci95_EX_hi: Optional[float] = None
    ci95_EX2_lo: Optional[float] = None
    ci95_EX2_hi: Optional[float] = None
    ex2_upper_bound: Optional[float] = None
    dim2_checked: int = 0
    dim2_violations: int = 0
    empty: bool = False
    x_values: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("x_values")
        return d

    @property
    def ex_in_ci(self) -> Optional[bool]:
        if self.exact_logEX is None or self.empty:
            return None
        ex = math.exp(self.exact_logEX)
        return self.ci95_EX_lo <= ex <= self.ci95_EX_hi

    @property
    def pz_consistent(self) -> Optional[bool]:
        """P(X>0) >= (EX)^2/EX^2 - 3 combined stderr."""
        if self.empty or self.pz_bound is None:
            return None
        combined = math.hypot(self.se_PXpos, self.se_pz)
        return self.mc_PXpos >= self.pz_bound - 3 * combined


def summarize_moments(xs: Iterable[int], n: int, h: int, seed: int,
                      exact_logEX: Optional[float] = None) -> MomentReport:
    x = np.asarray(list(xs), dtype=float)
    N = len(x)
    rep = MomentReport(n, h, N, seed, exact_logEX=exact_logEX, x_values=[int(v) for v in x])
    rep.ex2_upper_bound = (100 * h) ** (5 * h) / factorial(h) ** 2
    if N == 0:
        rep.empty = True
        return rep
    x2 = x * x
    pos = (x > 0).astype(float)
    z = _z95()
    rep.mc_EX, rep.mc_EX2, rep.mc_PXpos = float(x.mean()), float(x2.mean()), float(pos.mean())
    ddof = 1 if N > 1 else 0
    rep.se_EX = float(x.std(ddof=ddof) / math.sqrt(N))
    rep.se_EX2 = float(x2.std(ddof=ddof) / math.sqrt(N))
    rep.se_PXpos = float(pos.std(ddof=ddof) / math.sqrt(N))
    rep.ci95_EX_lo, rep.ci95_EX_hi = rep.mc_EX - z * rep.se_EX, rep.mc_EX + z * rep.se_EX
    rep.ci95_EX2_lo, rep.ci95_EX2_hi = rep.mc_EX2 - z * rep.se_EX2, rep.mc_EX2 + z * rep.se_EX2
    if rep.mc_EX2 > 0:
        a, b = rep.mc_EX, rep.mc_EX2
        rep.pz_bound = a * a / b
        # delta method on (mean X, mean X^2)
        cov = np.cov(np.vstack([x, x2]), ddof=ddof) / N if N > 1 else np.zeros((2, 2))
        grad = np.array([2 * a / b, -a * a / (b * b)])
        rep.se_pz = float(math.sqrt(max(grad @ cov @ grad, 0.0)))
    else:
        rep.pz_bound, rep.se_pz = 0.0, 0.0
    return rep


def mc_moments(n: int, h: int, trials: int, seed: int, kernel: Optional[ProjectionKernel] = None,
               samples: Optional[Iterable] = None, method: str = "auto",
               with_exact: bool = True, observer=None) -> MomentReport:
    """Monte Carlo moments of X_n checking dim H_1(., F_2) >= h whenever X > 0.

    ``observer(T, cycles, X, dim2)`` is called per trial when given.
    """
    if samples is None:
        if trials == 0:
            samples = []
        else:
            K = kernel if kernel is not None else build_kernel(n)
            samples = sample_stream(K, seed, trials, method=method)
    xs = []
    checked = violations = 0
    for T in samples:
        cycles, X = count_valid_cycles(T, h)
        dim2 = None
        if X > 0:
            dim2 = h1_dim(T, 2)
            checked += 1
            violations += dim2 < h
        if observer is not None:
            observer(T, cycles, X, dim2)
        xs.append(X)
    exact = expected_X_exact(n, h).log_value if with_exact and 5 * h < n else None
    rep = summarize_moments(xs, n, h, seed, exact)
    rep.dim2_checked, rep.dim2_violations = checked, violations
    return rep


# ---------------------------------------------------------------- spectra

@dataclass
class SpectrumVerdict:
    n: int
    h: int
    size: int
    top_count: int          # C(n-2,2) - 5h - 5nh
    mid_count: int          # 5nh
    ones_required: int      # n - 2
    ones_found: int
    min_eigenvalue: float
    top_ok: bool
    mid_ok: bool
    ones_ok: bool
    min_ok: bool
    logdet: float
    logdet_bound: float
    logdet_ok: bool
    decomposition_ok: bool
    rank_M_prime: int
    f12_size: int
    violation: Optional[str] = None

    @property
    def satisfied(self) -> bool:
        return self.violation is None


def spectrum_report(n: int, F: CycleFamily, tol: float = 1e-6) -> SpectrumVerdict:
    """Check the eigenvalue structure of M_G used in the first-moment lower bound."""
    if n < 16:
        raise ValueError("spectral checks need n >= 16")
    h = F.h
    blocks = graph_blocks(n, F)
    M = blocks.M()
    N = blocks.N()
    Mp = blocks.M_prime()
    decomposition_ok = bool(np.array_equal(M, n * np.eye(len(M), dtype=np.int64) - N - Mp))
    ev = sym_eigenvalues(M.astype(float))
    top = comb(n - 2, 2) - 5 * h - 5 * n * h
    mid = 5 * n * h
    ones = int(np.sum(np.abs(ev - 1.0) <= tol))
    top_ok = bool(np.all(ev[:top] >= n - tol))
    mid_ok = bool(np.all(ev[top:top + mid] >= n - 14 - tol))
    min_ok = bool(ev.min() >= 1 - tol)
    logdet = logdet_spd(M)
    bound = top * math.log(n) + mid * math.log(n - 14)
    rankMp = int(np.linalg.matrix_rank(Mp.astype(float)))
    violation = None
    checks = [
        ("ones", ones >= n - 2, n - 2),
        ("min", min_ok, int(np.argmin(ev[::-1]))),
        ("top", top_ok, int(np.argmax(ev[:top] < n - tol)) if top > 0 else 0),
        ("mid", mid_ok, top + (int(np.argmax(ev[top:top + mid] < n - 14 - tol)) if mid else 0)),
        ("logdet", logdet >= bound, -1),
        ("decomposition", decomposition_ok, -1),
        ("rank", rankMp <= len(blocks.F12) <= 5 * n * h, -1),
    ]
    for name, ok, where in checks:
        if not ok:
            violation = f"{name} violated at index {where}"
            break
    return SpectrumVerdict(
        n, h, len(M), top, mid, n - 2, ones, float(ev.min()), top_ok, mid_ok, ones >= n - 2,
        min_ok, logdet, bound, logdet >= bound, decomposition_ok, rankMp, len(blocks.F12), violation,
    )


# ---------------------------------------------------------------- block determinant splitting

def cycle_block_det(n: int, cycle) -> int:
    """det J^r[E(C), F_2(C)] for one 5-cycle avoiding vertex n."""
    if n in cycle:
        raise ValueError("cycle must avoid vertex n")
    A = reduced_boundary(n).astype(np.int64)
    rows = [edge_rank(*e) for e in sorted(cycle_edges(cycle))]
    cols = [triangle_rank(*t) for t in sorted(cycle_triangles(cycle))]
    return det_exact(A[np.ix_(rows, cols)])


def split_block_dets(n: int, F: CycleFamily, C0) -> tuple:
    """(det J^r[F_2 + C_0], det J^r[E(Gbar), C_0]) for C_0 a subset of F_0."""
    blocks = graph_blocks(n, F)
    A = reduced_boundary(n).astype(np.int64)
    c0 = sorted(triangle_rank(*t) if not np.isscalar(t) else int(t) for t in C0)
    f2 = sorted(triangle_rank(*t) for t in blocks.family.f2())
    full = det_exact(A[:, f2 + c0])
    comp = det_exact(A[np.ix_(blocks.rows, c0)])
    return full, comp


# ---------------------------------------------------------------- second moment

@dataclass
class OverlapCensus:
    n: int
    h: int
    k: int
    count: int
    bound: Fraction
    histogram: dict
    vertex_overlap_ok: bool

    @property
    def within_bound(self) -> bool:
        return self.count <= self.bound


def overlap_bound(n: int, h: int, k: int) -> Fraction:
    """n^{5h-k} (5h)^k C(5h,k) / (10^h h!)."""
    if k > 5 * h:
        return Fraction(0)
    return Fraction(n ** (5 * h - k) * (5 * h) ** k * comb(5 * h, k), 10**h * factorial(h))


def overlap_census(n: int, h: int, G0: CycleFamily, k: int) -> OverlapCensus:
    """Exact |G_n(G0, k)| by scanning every family, plus the vertex-overlap check."""
    if n > OVERLAP_MAX_N:
        raise ValueError(f"exact overlap census limited to n <= {OVERLAP_MAX_N}")
    f0 = G0.f2()
    v0 = G0.vertices
    hist: dict = {}
    ok = True
    for G1 in enumerate_cycle_families(n, h):
        ov = len(f0 & G1.f2())
        hist[ov] = hist.get(ov, 0) + 1
        if len(v0 & G1.vertices) < ov:
            ok = False
    return OverlapCensus(n, h, k, hist.get(k, 0), overlap_bound(n, h, k), hist, ok)


@dataclass
class PairVerdict:
    k: int
    union_size: int
    minor: float
    bound: float
    minor_ok: bool
    samples: int = 0
    freq_joint: Optional[float] = None
    freq_inclusion: Optional[float] = None
    joint_ok: Optional[bool] = None
    inclusion_z: Optional[float] = None


def pair_prob_check(n: int, G0: CycleFamily, G1: CycleFamily, samples=0,
                    kernel: Optional[ProjectionKernel] = None, seed: int = 0) -> PairVerdict:
    """P(both families are cocycles) <= P(F2(G0) u F2(G1) in T_n) <= (3/n)^{10h-k}.

    ``samples`` is either a count of fresh draws or an iterable of hypertrees.
    """
    K = kernel if kernel is not None else build_kernel(n)
    f0, f1 = G0.f2(), G1.f2()
    k = len(f0 & f1)
    union = sorted(f0 | f1)
    minor = inclusion_prob(K, union)
    h = G0.h
    bound = (3 / n) ** (10 * h - k)
    verdict = PairVerdict(k, len(union), minor, bound, minor <= bound + 1e-12)
    if isinstance(samples, int):
        samples = sample_stream(K, seed, samples) if samples else []
    g0, g1 = G0.graph(), G1.graph()
    want = {triangle_rank(*t) for t in union}
    N = joint = incl = 0
    for T in samples:
        N += 1
        joint += is_cocycle(T.base, g0) and is_cocycle(T.base, g1)
        incl += want <= set(T.ranks)
    if N:
        verdict.samples = N
        verdict.freq_joint = joint / N
        verdict.freq_inclusion = incl / N
        verdict.joint_ok = verdict.freq_joint <= bound + 4 * math.sqrt(bound * (1 - bound) / N)
        se = math.sqrt(max(minor * (1 - minor), 1e-300) / N)
        verdict.inclusion_z = (verdict.freq_inclusion - minor) / se
    return verdict
