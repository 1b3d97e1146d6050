"""Exact linear algebra over Z, Z/p, Z/p^K and Q, plus a checked eigen-solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from numba import njit
from sympy import factorint, isprime


class SingularMatrixError(ValueError):
    pass


def _require_prime(p: int) -> None:
    if not isprime(int(p)):
        raise ValueError(f"{p} is not prime")


def _as_int_rows(M) -> list:
    return [[int(x) for x in row] for row in np.asarray(M, dtype=object).reshape(np.shape(M))]


# ---------------------------------------------------------------- GF(2)

def pack_rows(M) -> list:
    """Rows of a 0/1 (mod 2) matrix as int bitsets; bit j is column j."""
    A = np.asarray(M)
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    bits = (A.astype(np.int64) & 1).astype(np.uint8)
    out = []
    for row in bits:
        packed = np.packbits(row, bitorder="little").tobytes()
        out.append(int.from_bytes(packed, "little"))
    return out


def gf2_rank(rows: Sequence[int]) -> int:
    """Rank over GF(2) of bitset rows (xor-basis keyed by leading bit)."""
    basis: dict = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            b = basis.get(top)
            if b is None:
                basis[top] = v
                break
            v ^= b
    return len(basis)


def gf2_nullspace(rows: Sequence[int], ncols: int) -> list:
    """Basis (as bitsets) of {x : M x = 0} over GF(2)."""
    pivots: dict = {}  # pivot column -> fully reduced row
    for v in rows:
        for col, r in pivots.items():
            if (v >> col) & 1:
                v ^= r
        if not v:
            continue
        col = (v & -v).bit_length() - 1
        for c in list(pivots):
            if (pivots[c] >> col) & 1:
                pivots[c] ^= v
        pivots[col] = v
    basis = []
    for free in range(ncols):
        if free in pivots:
            continue
        x = 1 << free
        for col, r in pivots.items():
            if (r >> free) & 1:
                x |= 1 << col
        basis.append(x)
    return basis


# ---------------------------------------------------------------- Z/p

@njit(cache=True)
def _rank_mod_p_kernel(A, p):
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if A[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, cols):
                tmp = A[r, j]
                A[r, j] = A[piv, j]
                A[piv, j] = tmp
        # inverse of the pivot by extended Euclid
        a, m, x0, x1 = A[r, c], p, 1, 0
        while m != 0:
            q = a // m
            a, m = m, a - q * m
            x0, x1 = x1, x0 - q * x1
        inv = x0 % p
        for j in range(c, cols):
            A[r, j] = A[r, j] * inv % p
        for i in range(r + 1, rows):
            f = A[i, c]
            if f != 0:
                g = p - f
                for j in range(c, cols):
                    A[i, j] = (A[i, j] + g * A[r, j]) % p
        r += 1
    return r


def rank_mod_p(M, p: int) -> int:
    """Rank of an integer matrix over the field with p elements."""
    _require_prime(p)
    A = np.asarray(M)
    if A.size == 0:
        return 0
    if p == 2:
        return gf2_rank(pack_rows(A))
    if p < 2**31:
        work = np.mod(A.astype(np.int64), p)
        return int(_rank_mod_p_kernel(np.ascontiguousarray(work), np.int64(p)))
    rows = [[int(x) % p for x in row] for row in A.tolist()]
    r = 0
    ncols = len(rows[0])
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(r + 1, len(rows)):
            f = rows[i][c]
            if f:
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


# ---------------------------------------------------------------- Z and Q

def det_exact(M) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    A = _as_int_rows(M)
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("det_exact needs a square matrix")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        akk = A[k][k]
        rowk = A[k]
        for i in range(k + 1, n):
            rowi = A[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def rank_rational(M) -> int:
    """Rank over Q via fraction-free elimination."""
    A = _as_int_rows(M)
    if not A or not A[0]:
        return 0
    rows, cols = len(A), len(A[0])
    r, prev = 0, 1
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        arc = A[r][c]
        for i in range(r + 1, rows):
            aic = A[i][c]
            A[i] = [(A[i][j] * arc - aic * A[r][j]) // prev for j in range(cols)]
        prev = arc
        r += 1
        if r == rows:
            break
    return r


def solve_rational(A, B) -> list:
    """Solve A X = B exactly over Q (A square, nonsingular); rows of Fractions."""
    a = [[Fraction(int(x)) for x in row] for row in np.asarray(A).tolist()]
    b = [[Fraction(int(x)) for x in row] for row in np.asarray(B).tolist()]
    n = len(a)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise SingularMatrixError("singular system")
        a[c], a[piv] = a[piv], a[c]
        b[c], b[piv] = b[piv], b[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        b[c] = [x * inv for x in b[c]]
        for i in range(n):
            f = a[i][c]
            if i != c and f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                b[i] = [x - f * y for x, y in zip(b[i], b[c])]
    return b


def det_fraction(M) -> Fraction:
    """Determinant of a small matrix of Fractions (Gaussian elimination)."""
    a = [list(map(Fraction, row)) for row in M]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] * inv
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def smith_diagonal(M) -> list:
    """Smith normal form diagonal d_1 | d_2 | ... of an integer matrix."""
    A = _as_int_rows(M)
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag = []
    for t in range(min(rows, cols)):
        nz = [(abs(A[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if A[i][j]]
        if not nz:
            diag.extend([0] * (min(rows, cols) - t))
            break
        _, i, j = min(nz)
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            piv = A[t][t]
            done = True
            for i in range(t + 1, rows):
                q = A[i][t] // piv
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, cols):
                q = A[t][j] // piv
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j]:
                    done = False
            if done:
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                            if A[i][j] % piv), None)
                if bad is None:
                    break
                # pull the offending row into row t so the gcd drops
                A[t] = [x + y for x, y in zip(A[t], A[bad[0]])]
                continue
            # move the smallest remaining entry of row/column t into the pivot
            cand = [(abs(A[i][t]), i, t) for i in range(t, rows) if A[i][t]]
            cand += [(abs(A[t][j]), t, j) for j in range(t, cols) if A[t][j]]
            _, i, j = min(cand)
            A[t], A[i] = A[i], A[t]
            for row in A:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(A[t][t]))
    return diag


@dataclass(frozen=True)
class InvariantFactors:
    """Finite abelian group as Sylow exponent lists; ``order`` is |group|."""

    sylow: dict = field(default_factory=dict)
    order: int = 1
    factors: tuple = ()

    @classmethod
    def from_diagonal(cls, diag: Sequence[int]) -> "InvariantFactors":
        if any(d == 0 for d in diag):
            raise SingularMatrixError("infinite cokernel")
        sylow: dict = {}
        for d in diag:
            for p, e in factorint(d).items():
                sylow.setdefault(int(p), []).append(int(e))
        sylow = {p: sorted(es) for p, es in sorted(sylow.items())}
        return cls(sylow, math.prod(diag), tuple(d for d in diag if d != 1))

    def exponents(self, p: int) -> list:
        return list(self.sylow.get(p, []))

    def is_trivial(self) -> bool:
        return self.order == 1


# ---------------------------------------------------------------- Z/p^K

def _log_hadamard(A: np.ndarray) -> float:
    norms = np.sqrt((A.astype(float) ** 2).sum(axis=1))
    if (norms == 0).any():
        return -math.inf
    return float(np.log(norms).sum())


def _padic_exponents(M: np.ndarray, p: int, K: int):
    """Valuations of the Smith diagonal over Z/p^K, or None if some are >= K."""
    pK = p**K
    dtype = np.int64 if pK <= 2**31 else object
    A = np.mod(M.astype(dtype), pK)
    out = []
    while A.shape[0]:
        v, pos = None, None
        for t in range(K):
            hit = np.flatnonzero((A % p ** (t + 1)).ravel() != 0)
            if hit.size:
                v, pos = t, int(hit[0])
                break
        if v is None:
            return None
        i, j = divmod(pos, A.shape[1])
        pv = p**v
        unit = int(A[i, j]) // pv
        inv = pow(unit, -1, pK)
        col = (A[:, j] // pv) * inv % pK
        col[i] = 0
        A = (A - np.outer(col, A[i])) % pK
        A = np.delete(np.delete(A, i, axis=0), j, axis=1)
        if v:
            out.append(v)
    return sorted(out)


def sylow_invariants(M, p: int, K0: int = 8) -> list:
    """Exponents e_1 <= e_2 <= ... of the p-part of cok(M) for square nonsingular M.

    Works modulo p^K, doubling K until the exponent list is stable under K -> 2K.
    """
    _require_prime(p)
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("sylow_invariants needs a square matrix")
    if A.shape[0] == 0:
        return []
    log_h = _log_hadamard(A)
    if log_h == -math.inf:
        raise SingularMatrixError("zero row")
    max_val = int(log_h / math.log(p)) + 1
    K = K0
    while True:
        res = _padic_exponents(A, p, K)
        if res is not None and _padic_exponents(A, p, 2 * K) == res:
            return res
        if res is None and K > max_val:
            raise SingularMatrixError("matrix is singular")
        K *= 2


# ---------------------------------------------------------------- reals

def sym_eigenvalues(M) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix in descending order."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if np.abs(A - A.T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigvalsh(A)[::-1]
