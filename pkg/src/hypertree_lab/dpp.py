"""Projection kernel of the determinantal hypertree measure and exact samplers.

The kernel is the orthogonal projection onto the row space of the reduced
boundary A = J^r_{n,2}, i.e. K = A^T (A A^T)^{-1} A. A random hypertree is
the projection determinantal process with this kernel, so it always has
rank(K) = C(n-1, 2) triangles.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Iterator, Optional

import numpy as np
import scipy.linalg
from numba import njit

from .faces import Complex2, Hypertree, faces, reduced_boundary, triangle_rank
from .linalg import det_fraction, rank_mod_p, solve_rational
from .seeding import SeedScheme, SplitMix64

log = logging.getLogger(__name__)

EXACT_MAX_N = 8
DENSE_MAX_M = 5000
DEFLATE_MAX_N = 20  # "auto" switches to the rejection sampler above this
SIZE_CAP = 60


class SamplerDefect(RuntimeError):
    """Raised when a drawn set fails its nonsingularity certificate."""


# callables invoked with every certified sample (used for suite-wide audits)
_observers: list = []


def add_sample_observer(fn) -> None:
    _observers.append(fn)


def remove_sample_observer(fn) -> None:
    if fn in _observers:
        _observers.remove(fn)


def notify_observers(T) -> None:
    for fn in _observers:
        fn(T)


@dataclass(frozen=True, eq=False)
class ProjectionKernel:
    """K = Q Q^T with ``basis`` Q (m x r, orthonormal columns).

    ``dense`` holds K itself when m is small enough, ``exact`` holds K as
    Fractions for n <= 8.
    """

    n: int
    basis: np.ndarray
    dense: Optional[np.ndarray] = None
    exact: Optional[list] = None
    mode: str = "float"

    @property
    def size(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def matrix(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        return self.basis @ self.basis.T

    def submatrix(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if self.dense is not None:
            return self.dense[np.ix_(idx, idx)]
        rows = self.basis[idx]
        return rows @ rows.T

    def diagonal(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.basis, self.basis)

    def check(self, tol: float = 1e-10) -> dict:
        """Projection, trace and constant-diagonal diagnostics."""
        K = self.matrix()
        idem = float(np.abs(K @ K - K).max())
        trace = float(np.trace(K))
        diag_dev = float(np.abs(np.diag(K) - 3.0 / self.n).max())
        return {
            "idempotent_err": idem,
            "trace_err": abs(trace - comb(self.n - 1, 2)),
            "diag_err": diag_dev,
            "ok": idem <= tol and abs(trace - comb(self.n - 1, 2)) <= 1e-8 and diag_dev <= tol,
        }


def _exact_kernel(n: int) -> list:
    A = reduced_boundary(n).astype(np.int64)
    X = solve_rational(A @ A.T, A)
    r, m = A.shape
    nz = [[(e, int(A[e, i])) for e in range(r) if A[e, i]] for i in range(m)]
    return [[sum((a * X[e][j] for e, a in nz[i]), Fraction(0)) for j in range(m)] for i in range(m)]


def build_kernel(n: int, mode: str = "auto") -> ProjectionKernel:
    """Projection kernel on all C(n,3) triangles of [n].

    mode "exact" computes (A A^T)^{-1} in rationals (n <= 8); "float" uses a
    symmetric positive-definite solve; "auto" picks exact when allowed.
    """
    if n < 4:
        raise ValueError(f"kernel needs n >= 4, got {n}")
    if n > SIZE_CAP:
        raise ValueError(f"n={n} exceeds the size cap {SIZE_CAP}")
    if mode == "auto":
        mode = "exact" if n <= EXACT_MAX_N else "float"
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown kernel mode {mode!r}")
    if mode == "exact" and n > EXACT_MAX_N:
        raise ValueError(f"exact kernel limited to n <= {EXACT_MAX_N}")
    A = reduced_boundary(n).astype(np.float64)
    m = A.shape[1]
    Q, _ = np.linalg.qr(A.T)
    Q = np.ascontiguousarray(Q)
    exact = None
    dense = None
    if mode == "exact":
        exact = _exact_kernel(n)
        dense = np.array([[float(x) for x in row] for row in exact])
    elif m <= DENSE_MAX_M:
        X = scipy.linalg.solve(A @ A.T, A, assume_a="pos")
        dense = A.T @ X
        dense = (dense + dense.T) / 2
    return ProjectionKernel(n, Q, dense, exact, mode)


def _face_indices(K: ProjectionKernel, F: Iterable) -> list:
    idx = []
    for f in F:
        idx.append(int(f) if np.isscalar(f) else triangle_rank(*sorted(f)))
    if len(set(idx)) != len(idx):
        raise ValueError("duplicate faces in inclusion query")
    if any(i < 0 or i >= K.size for i in idx):
        raise ValueError("face outside the kernel's ground set")
    return idx


def inclusion_prob(K: ProjectionKernel, F: Iterable, exact: bool = False):
    """P(F subset of T_n) = det K[F, F]; a Fraction when ``exact``."""
    idx = _face_indices(K, F)
    if exact:
        if K.exact is None:
            raise ValueError("kernel has no exact form")
        return det_fraction([[K.exact[i][j] for j in idx] for i in idx])
    if not idx:
        return 1.0
    sign, logdet = np.linalg.slogdet(K.submatrix(idx))
    if sign <= 0:
        return 0.0
    return float(np.exp(logdet))


# ---------------------------------------------------------------- samplers

@njit(cache=True)
def _deflate_sample(U0, uniforms, reorth_every):
    r, m = U0.shape
    U = U0.copy()
    d = np.zeros(m)
    for c in range(r):
        for j in range(m):
            d[j] += U[c, j] * U[c, j]
    chosen = np.empty(r, dtype=np.int64)
    y = np.empty(m)
    for k in range(r):
        rem = r - k
        total = 0.0
        for j in range(m):
            if d[j] < 0.0:
                if d[j] < -1e-9:
                    return chosen, 1
                d[j] = 0.0
            total += d[j]
        target = uniforms[k] * total
        sel = -1
        acc = 0.0
        for j in range(m):
            if d[j] > 0.0:
                sel = j
                acc += d[j]
                if acc > target:
                    break
        if sel < 0:
            return chosen, 2
        chosen[k] = sel
        # Householder reflection sending the selected row direction to axis rem-1
        w = U[:rem, sel].copy()
        nx = np.sqrt(np.dot(w, w))
        w /= nx
        w[rem - 1] -= 1.0
        ww = np.dot(w, w)
        if ww > 1e-300:
            y[:] = np.dot(w, U[:rem])
            s = 2.0 / ww
            for c in range(rem):
                wc = s * w[c]
                if wc != 0.0:
                    for j in range(m):
                        U[c, j] -= wc * y[j]
        for j in range(m):
            d[j] -= U[rem - 1, j] * U[rem - 1, j]
        d[sel] = 0.0
        if (k + 1) % reorth_every == 0 and rem > 1:
            # Cholesky-QR: rows of U become orthonormal again, same span
            G = np.dot(U[: rem - 1], U[: rem - 1].T)
            L = np.linalg.cholesky(G)
            U[: rem - 1] = np.dot(np.linalg.inv(L), U[: rem - 1])
            for j in range(m):
                d[j] = 0.0
            for c in range(rem - 1):
                for j in range(m):
                    d[j] += U[c, j] * U[c, j]
            for i in range(k + 1):
                d[chosen[i]] = 0.0
    return chosen, 0


def _apply_pending(W: np.ndarray, ys: list, ss: list) -> np.ndarray:
    """Apply H_b ... H_1 (each dropping its last axis) to the rows of W in one go."""
    d0, b = W.shape[0], len(ys)
    Y = np.zeros((d0, b))
    for j, y in enumerate(ys):
        Y[: len(y), j] = y
    # compact WY: H_1 ... H_b = I - Y T Y^T with T upper triangular
    T = np.zeros((b, b))
    YtY = Y.T @ Y
    for j in range(b):
        T[j, j] = ss[j]
        if j:
            T[:j, j] = -ss[j] * (T[:j, :j] @ YtY[:j, j])
    W = W - Y @ (T.T @ (Y.T @ W))
    return np.ascontiguousarray(W[: d0 - b])


def _rejection_sample(Q: np.ndarray, stream: SplitMix64, block: int = 64, flush: int = 32) -> np.ndarray:
    """Same law as the deflation sampler: uniform proposals thinned by residual/bound.

    W holds an orthonormal basis of the complement of the chosen directions
    (in the r-dimensional row space), so a proposal's residual is |W q|^2.
    Each accept shrinks W by one Householder step; steps are queued and
    applied to W in blocks. Proposals are consumed strictly in stream order.
    """
    m, r = Q.shape
    norms = np.einsum("ij,ij->i", Q, Q)
    bound = float(norms.max())
    W = np.eye(r)
    ys: list = []
    ss: list = []
    chosen = np.empty(r, dtype=np.int64)
    taken = np.zeros(m, dtype=bool)
    k = 0
    while k < r:
        idx = (stream.uniforms(block) * m).astype(np.int64)
        coins = stream.uniforms(block) * bound
        C = Q[idx] @ W.T
        for y, s in zip(ys, ss):
            C = C[:, : len(y)]
            C -= np.outer(C @ y, s * y)
        C = C[:, : r - k]
        for j in range(block):
            c = C[j]
            res = float(c @ c)
            if taken[idx[j]] or not coins[j] < res:
                continue
            chosen[k] = idx[j]
            taken[idx[j]] = True
            k += 1
            if k == r:
                break
            # Householder sending c/|c| to the last axis, then drop that axis
            w = c / np.sqrt(res)
            w[-1] -= 1.0
            ww = float(w @ w)
            s = 2.0 / ww if ww > 1e-300 else 0.0
            ys.append(w)
            ss.append(s)
            tail = C[j + 1:]
            tail -= np.outer(tail @ w, s * w)
            C = C[:, :-1]
            if len(ys) == flush:
                W = _apply_pending(W, ys, ss)
                ys, ss = [], []
    return chosen


def _certify(n: int, ranks, stream: SplitMix64) -> int:
    sub = reduced_boundary(n)[:, list(ranks)]
    r = sub.shape[0]
    for _ in range(2):
        q = stream.prime30()
        if rank_mod_p(sub, q) == r:
            return q
        log.warning("n=%d: sample singular modulo %d, retrying", n, q)
    raise SamplerDefect(f"n={n}: drawn set singular modulo two random primes")


def sample(K: ProjectionKernel, seed: SeedScheme, method: str = "auto",
           reorth_every: int = 32) -> Hypertree:
    """Draw one determinantal hypertree; deterministic in ``seed``."""
    stream = seed.stream()
    if method == "auto":
        method = "deflate" if K.n <= DEFLATE_MAX_N else "rejection"
    if method == "deflate":
        uniforms = stream.uniforms(K.rank)
        chosen, status = _deflate_sample(np.ascontiguousarray(K.basis.T), uniforms, reorth_every)
        if status:
            raise SamplerDefect(f"residual diagonal went negative (status {status})")
    elif method == "rejection":
        chosen = _rejection_sample(K.basis, stream)
    elif method == "exact":
        chosen = _exact_sample(K, stream)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    ranks = sorted(int(i) for i in chosen)
    if len(set(ranks)) != K.rank:
        raise SamplerDefect("sampler repeated a triangle")
    cert = _certify(K.n, ranks, stream)
    T = Hypertree(Complex2.from_ranks(K.n, ranks), cert)
    notify_observers(T)
    return T


def _exact_sample(K: ProjectionKernel, stream: SplitMix64) -> list:
    """Sequential sampling with the residual kernel held in exact rationals."""
    if K.exact is None:
        raise ValueError("exact sampling needs an exact kernel (n <= 8)")
    R = [row[:] for row in K.exact]
    m, r = K.size, K.rank
    chosen = []
    for k in range(r):
        u = Fraction(stream.next_u64() >> 11, 1 << 53) * (r - k)
        acc = Fraction(0)
        sel = None
        for j in range(m):
            if R[j][j] > 0:
                sel = j
                acc += R[j][j]
                if acc > u:
                    break
        chosen.append(sel)
        piv = R[sel][sel]
        col = [R[i][sel] for i in range(m)]
        Rs = R[sel][:]
        for i in range(m):
            if col[i]:
                f = col[i] / piv
                Ri = R[i]
                for j in range(m):
                    if Rs[j]:
                        Ri[j] -= f * Rs[j]
    return chosen


def sample_stream(K: ProjectionKernel, master: int, trials: int, start: int = 0,
                  method: str = "auto") -> Iterator[Hypertree]:
    for i in range(start, start + trials):
        yield sample(K, SeedScheme(master, i), method=method)


def sample_record(T: Hypertree, seed: SeedScheme) -> dict:
    return {
        "n": T.n,
        "trial_index": seed.trial_index,
        "master_seed": seed.master,
        "triangles": list(T.ranks),
        "certificate": T.certificate,
    }


def all_triangles(n: int) -> tuple:
    return faces(n, 3)
