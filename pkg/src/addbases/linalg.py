"""Exact linear algebra over prime fields F_p and over the rationals.

Both matrix types use Gauss-Jordan elimination with first-seen pivoting,
so results are deterministic for a fixed input order.  Free variables of
underdetermined systems are set to zero.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InconsistentSystemError, SingularMatrixError

__all__ = [
    "FpMatrix",
    "QMatrix",
    "is_prime",
    "rank_of_vectors",
    "strict_upper_triangularize",
    "rowspace_inclusion_solve",
    "block_diag_perm",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class FpMatrix:
    """An immutable matrix over the prime field F_p."""

    __slots__ = ("p", "a")

    def __init__(self, entries, p: int):
        a = np.array(entries, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
        if a.ndim != 2:
            raise ValueError("matrix entries must be two-dimensional")
        a = a % p
        a.setflags(write=False)
        self.p = int(p)
        self.a = a

    @classmethod
    def identity(cls, n: int, p: int) -> "FpMatrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "FpMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @classmethod
    def diag(cls, values: Sequence[int], p: int) -> "FpMatrix":
        return cls(np.diag(np.array(values, dtype=np.int64)), p)

    @classmethod
    def hstack(cls, mats: Sequence["FpMatrix"]) -> "FpMatrix":
        return cls(np.hstack([m.a for m in mats]), mats[0].p)

    @classmethod
    def vstack(cls, mats: Sequence["FpMatrix"]) -> "FpMatrix":
        return cls(np.vstack([m.a for m in mats]), mats[0].p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def T(self) -> "FpMatrix":
        return FpMatrix(self.a.T, self.p)

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, FpMatrix):
            if other.p != self.p:
                raise ValueError(f"field mismatch: F_{self.p} vs F_{other.p}")
            return other.a
        return np.asarray(other, dtype=np.int64)

    def __add__(self, other):
        return FpMatrix(self.a + self._coerce(other), self.p)

    def __sub__(self, other):
        return FpMatrix(self.a - self._coerce(other), self.p)

    def __neg__(self):
        return FpMatrix(-self.a, self.p)

    def __mul__(self, c: int):
        return FpMatrix(self.a * (int(c) % self.p), self.p)

    __rmul__ = __mul__

    def __matmul__(self, other):
        b = self._coerce(other)
        if self.p < (1 << 31) and self.cols * (self.p - 1) ** 2 < (1 << 62):
            return FpMatrix(self.a @ b, self.p)
        return FpMatrix((self.a.astype(object) @ b.astype(object)) % self.p, self.p)

    def __eq__(self, other):
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and self.a.shape == other.a.shape and bool(np.array_equal(self.a, other.a))

    def __hash__(self):
        return hash((self.p, self.a.shape, self.a.tobytes()))

    def __repr__(self):
        return f"FpMatrix({self.a.tolist()}, p={self.p})"

    def __getitem__(self, key):
        out = self.a[key]
        if np.ndim(out) == 2:
            return FpMatrix(out, self.p)
        return out

    def is_zero(self) -> bool:
        return not self.a.any()

    # elimination

    def rref(self) -> tuple["FpMatrix", "FpMatrix", list[int]]:
        """(R, T, pivots) with T invertible, T @ self == R, R in reduced row echelon form."""
        p = self.p
        m, n = self.shape
        work = np.hstack([self.a, np.eye(m, dtype=np.int64)]).astype(np.int64)
        pivots: list[int] = []
        row = 0
        for col in range(n):
            if row == m:
                break
            nz = np.flatnonzero(work[row:, col])
            if nz.size == 0:
                continue
            piv = row + int(nz[0])
            if piv != row:
                work[[row, piv]] = work[[piv, row]]
            inv = pow(int(work[row, col]), -1, p)
            work[row] = (work[row] * inv) % p
            factors = work[:, col].copy()
            factors[row] = 0
            work = (work - np.outer(factors, work[row])) % p
            pivots.append(col)
            row += 1
        return FpMatrix(work[:, :n], p), FpMatrix(work[:, n:], p), pivots

    def rank(self) -> int:
        return len(self.rref()[2])

    def det(self) -> int:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        p = self.p
        a = self.a.copy()
        n = self.rows
        det = 1
        for col in range(n):
            nz = np.flatnonzero(a[col:, col])
            if nz.size == 0:
                return 0
            piv = col + int(nz[0])
            if piv != col:
                a[[col, piv]] = a[[piv, col]]
                det = -det
            pv = int(a[col, col])
            det = det * pv % p
            inv = pow(pv, -1, p)
            below = a[col + 1:, col] * inv % p
            a[col + 1:] = (a[col + 1:] - np.outer(below, a[col])) % p
        return det % p

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    def inverse(self) -> "FpMatrix":
        if self.rows != self.cols:
            raise SingularMatrixError("only square matrices can be inverted")
        R, T, piv = self.rref()
        if len(piv) < self.rows:
            raise SingularMatrixError(f"matrix has rank {len(piv)} < {self.rows}")
        return T

    def solve(self, rhs) -> "FpMatrix":
        """A solution X of self @ X == rhs (rhs a vector or a matrix).

        Raises InconsistentSystemError whose ``witness`` is the first
        right-hand-side column that has no solution.
        """
        b = self._coerce(rhs)
        vector = b.ndim == 1
        if vector:
            b = b.reshape(-1, 1)
        m, n = self.shape
        if b.shape[0] != m:
            raise ValueError(f"rhs has {b.shape[0]} rows, expected {m}")
        aug = FpMatrix(np.hstack([self.a, b]), self.p)
        R, _, _ = aug.rref()
        coeff, rest = R.a[:, :n], R.a[:, n:]
        pivots = [int(np.flatnonzero(r)[0]) for r in coeff if r.any()]
        zero_rows = ~coeff.any(axis=1)
        bad = np.flatnonzero(rest[zero_rows].any(axis=0))
        if bad.size:
            raise InconsistentSystemError("linear system is inconsistent", witness=int(bad[0]))
        x = np.zeros((n, b.shape[1]), dtype=np.int64)
        for i, c in enumerate(pivots):
            x[c] = rest[i]
        out = FpMatrix(x, self.p)
        if vector:
            return out.a[:, 0].copy()
        return out

    def nullspace(self) -> "FpMatrix":
        """Rows spanning {x : self @ x == 0}; shape (n - rank, n)."""
        R, _, pivots = self.rref()
        n = self.cols
        free = [c for c in range(n) if c not in set(pivots)]
        basis = np.zeros((len(free), n), dtype=np.int64)
        for k, f in enumerate(free):
            basis[k, f] = 1
            for i, c in enumerate(pivots):
                basis[k, c] = -R.a[i, f]
        return FpMatrix(basis.reshape(len(free), n), self.p)

    def rowspace(self) -> "FpMatrix":
        """RREF basis of the row space (rank x cols)."""
        R, _, piv = self.rref()
        return FpMatrix(R.a[: len(piv)].reshape(len(piv), self.cols), self.p)


class QMatrix:
    """An immutable matrix over the rationals with Fraction entries."""

    __slots__ = ("rows_", "shape")

    def __init__(self, entries: Iterable[Iterable]):
        rows = tuple(tuple(Fraction(x) for x in r) for r in entries)
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise ValueError("ragged matrix")
        self.rows_ = rows
        self.shape = (len(rows), widths.pop() if widths else 0)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self.rows_]

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.rows_ == other.rows_

    def __hash__(self):
        return hash(self.rows_)

    def __repr__(self):
        return f"QMatrix({[[str(x) for x in r] for r in self.rows_]})"

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.shape[1] != other.shape[0]:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.rows_)) if other.rows_ else []
        return QMatrix([[sum((x * y for x, y in zip(r, c)), Fraction(0)) for c in cols] for r in self.rows_])

    def rref(self) -> tuple["QMatrix", "QMatrix", list[int]]:
        m, n = self.shape
        work = [list(r) + [Fraction(int(i == j)) for j in range(m)] for i, r in enumerate(self.rows_)]
        pivots: list[int] = []
        row = 0
        for col in range(n):
            if row == m:
                break
            piv = next((i for i in range(row, m) if work[i][col] != 0), None)
            if piv is None:
                continue
            work[row], work[piv] = work[piv], work[row]
            inv = 1 / work[row][col]
            work[row] = [x * inv for x in work[row]]
            for i in range(m):
                f = work[i][col]
                if i != row and f:
                    work[i] = [x - f * y for x, y in zip(work[i], work[row])]
            pivots.append(col)
            row += 1
        return QMatrix([r[:n] for r in work]), QMatrix([r[n:] for r in work]), pivots

    def rank(self) -> int:
        return len(self.rref()[2])

    def inverse(self) -> "QMatrix":
        m, n = self.shape
        if m != n:
            raise SingularMatrixError("only square matrices can be inverted")
        _, T, piv = self.rref()
        if len(piv) < n:
            raise SingularMatrixError(f"matrix has rank {len(piv)} < {n}")
        return T

    def solve(self, rhs: Sequence) -> list[Fraction]:
        m, n = self.shape
        b = [Fraction(x) for x in rhs]
        if len(b) != m:
            raise ValueError("rhs length mismatch")
        aug = QMatrix([list(r) + [x] for r, x in zip(self.rows_, b)])
        R, _, piv = aug.rref()
        if n in piv:
            raise InconsistentSystemError("linear system is inconsistent", witness=0)
        x = [Fraction(0)] * n
        for i, c in enumerate(piv):
            x[c] = R.rows_[i][n]
        return x


def rank_of_vectors(vectors: Sequence[Sequence], p: int | None = None) -> tuple[int, list[int]]:
    """Dimension of the span and the positions of a maximal independent sublist.

    The sublist is chosen greedily in input order (first-seen).  ``p=None``
    means the rationals.
    """
    vectors = list(vectors)
    if not vectors:
        return 0, []
    if p is None:
        cols = QMatrix(list(zip(*[[Fraction(x) for x in v] for v in vectors])))
        piv = cols.rref()[2]
    else:
        piv = FpMatrix(np.array(vectors, dtype=np.int64).T, p).rref()[2]
    return len(piv), piv


def block_diag_perm(r: int, shift: int, p: int) -> FpMatrix:
    """Permutation matrix P with P[i, (i + shift) mod r] = 1."""
    P = np.zeros((r, r), dtype=np.int64)
    for i in range(r):
        P[i, (i + shift) % r] = 1
    return FpMatrix(P, p)


def strict_upper_triangularize(N: FpMatrix) -> tuple[FpMatrix, FpMatrix]:
    """Invertible (U, V) with V @ N @ U strictly upper triangular.

    N must be square and singular.  With s = rank(N) < r we reduce N to
    [[I_s, 0], [0, 0]] by row operations V and column operations Q, then
    cyclically shift columns by r - s so the identity block lands on
    positions (i, r - s + i), which are above the diagonal.
    """
    r, c = N.shape
    if r != c:
        raise ValueError("strict_upper_triangularize needs a square matrix")
    p = N.p
    R, V, pivots = N.rref()
    s = len(pivots)
    if s == r:
        raise ValueError("matrix is nonsingular; no strictly triangular form exists")
    nonpiv = [j for j in range(r) if j not in set(pivots)]
    order = pivots + nonpiv
    Q1 = np.zeros((r, r), dtype=np.int64)
    for new, old in enumerate(order):
        Q1[old, new] = 1
    RQ = (R.a @ Q1) % p
    Q2 = np.eye(r, dtype=np.int64)
    Q2[:s, s:] = -RQ[:s, s:]
    Q = FpMatrix(Q1 @ Q2, p)
    U = Q @ block_diag_perm(r, r - s, p)
    return U, V


def rowspace_inclusion_solve(target: FpMatrix, sources: Sequence[FpMatrix]) -> list[FpMatrix]:
    """Blocks A_j (target.rows x sources[j].rows) with target == sum_j A_j @ sources[j].

    Raises InconsistentSystemError whose ``witness`` is the index of the
    first row of ``target`` outside the stacked row space of the sources.
    """
    if not sources:
        if target.is_zero():
            return []
        raise InconsistentSystemError("no sources to span a nonzero target", witness=0)
    p = target.p
    stacked = FpMatrix.vstack(sources)
    if stacked.cols != target.cols:
        raise ValueError("column count mismatch")
    coeffT = stacked.T.solve(target.T)
    coeff = coeffT.T
    blocks, off = [], 0
    for S in sources:
        blocks.append(FpMatrix(coeff.a[:, off: off + S.rows].reshape(target.rows, S.rows), p))
        off += S.rows
    return blocks
