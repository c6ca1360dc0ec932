"""Lattices in Z^{kr}, p-obliqueness and covering numbers of {0,1}^{kr}.

Coordinates of Z^{kr} are ordered block by block,
``(z_11, ..., z_1r, z_21, ..., z_kr)``; index ``(i, j)`` (0-based) is
position ``i*r + j``.  Cube vertices are enumerated little-endian: vertex
number ``x`` has coordinate c equal to bit c of x.

A translate s + L covers exactly the vertices in the coset s + L, so the
covering number is the number of distinct cosets met by the cube.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DeskScaleError, InvariantBreach, max_cube_dim
from .linalg import FpMatrix, is_prime
from .sumsets import fp_multiset, subset_sum_set, sumset_many

__all__ = [
    "BlockLattice",
    "IntLattice",
    "BasisSystem",
    "ObliqueCheck",
    "hermite_normal_form",
    "is_p_oblique",
    "covering_number",
    "example_lattice",
    "phi_apply",
    "lattice_from_bases",
    "lattice_leq",
    "cube_vertices",
]

_CHUNK = 1 << 15


def cube_vertices(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows ``start..stop-1`` of the little-endian listing of {0,1}^n (int64)."""
    stop = (1 << n) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)


def _check_cube(n: int) -> None:
    cap = max_cube_dim()
    if n > cap:
        raise DeskScaleError(
            f"cube dimension {n} exceeds desk-scale cap {cap} (set ADDBASES_MAX_CUBE_DIM)"
        )


class BlockLattice:
    """The lattice L = {z in Z^{kr} : z mod p in W} for a subspace W of F_p^{kr}.

    L always contains pZ^{kr}, has full rank, and det L = p^(kr - dim W).
    ``gens`` is the reduced row echelon basis of W (dim W x kr).
    """

    __slots__ = ("p", "k", "r", "gens", "_pivots")

    def __init__(self, p: int, k: int, r: int, generators: Sequence[Sequence[int]] | FpMatrix = ()):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if k < 2 or r < 1:
            raise ValueError("need k >= 2 and r >= 1")
        n = k * r
        if isinstance(generators, FpMatrix):
            gen = generators.a
        else:
            gen = np.array(list(generators), dtype=np.int64).reshape(-1, n) if len(generators) else np.zeros((0, n), dtype=np.int64)
        if gen.shape[1] != n:
            raise ValueError(f"generators must have length k*r = {n}")
        R, _, piv = FpMatrix(gen, p).rref()
        self.p, self.k, self.r = int(p), int(k), int(r)
        self.gens = FpMatrix(R.a[: len(piv)].reshape(len(piv), n), p)
        self._pivots = piv

    @property
    def dim(self) -> int:
        return self.k * self.r

    @property
    def dim_w(self) -> int:
        return self.gens.rows

    @property
    def det(self) -> int:
        return self.p ** (self.dim - self.dim_w)

    def params(self) -> tuple[int, int, int]:
        return self.p, self.k, self.r

    def contains(self, z: Sequence[int]) -> bool:
        z = np.asarray(z, dtype=np.int64) % self.p
        if not z.any():
            return True
        stacked = FpMatrix(np.vstack([self.gens.a, z.reshape(1, -1)]), self.p)
        return stacked.rank() == self.dim_w

    def coset_keys(self, vectors: np.ndarray) -> np.ndarray:
        """Canonical coset keys of integer row vectors.

        The pivot coordinates of W's RREF are eliminated; what remains of the
        non-pivot coordinates (mod p) identifies the coset.
        """
        p = self.p
        piv = self._pivots
        free = [c for c in range(self.dim) if c not in set(piv)]
        v = np.asarray(vectors, dtype=np.int64) % p
        red = v[:, free]
        if piv:
            red = red - v[:, piv] @ self.gens.a[:, free]
        return red % p

    def block(self, i: int) -> FpMatrix:
        """Columns of block i of the generator matrix (dim W x r)."""
        return FpMatrix(self.gens.a[:, i * self.r:(i + 1) * self.r].reshape(self.dim_w, self.r), self.p)

    def to_int_lattice(self) -> "IntLattice":
        """The same lattice described by W's lifted basis plus p * (unit vectors)."""
        lifted = [list(map(int, row)) for row in self.gens.a]
        lifted += [[self.p * int(i == j) for j in range(self.dim)] for i in range(self.dim)]
        return IntLattice(lifted)

    def __eq__(self, other):
        return isinstance(other, BlockLattice) and self.params() == other.params() and self.gens == other.gens

    def __hash__(self):
        return hash((self.params(), self.gens))

    def __repr__(self):
        return f"BlockLattice(p={self.p}, k={self.k}, r={self.r}, dim_W={self.dim_w})"


def hermite_normal_form(generators: Sequence[Sequence[int]], dim: int) -> list[list[int]]:
    """Lower-triangular column HNF of the lattice spanned by ``generators``.

    Returns the d x d matrix H (as rows) whose columns are a basis with
    H[i][i] > 0, H[i][j] = 0 for j > i and 0 <= H[i][j] < H[i][i] for j < i.
    Raises ValueError if the generators do not span a full-rank lattice.
    """
    cols = [list(map(int, g)) for g in generators]
    if any(len(c) != dim for c in cols):
        raise ValueError(f"generators must have length {dim}")
    m = len(cols)
    if m < dim:
        raise ValueError("fewer generators than the dimension: lattice is not full rank")
    for i in range(dim):
        for j in range(i + 1, m):
            b = cols[j][i]
            if b == 0:
                continue
            a = cols[i][i]
            g, x, y = _xgcd(a, b)
            ci, cj = cols[i], cols[j]
            cols[i] = [x * u + y * v for u, v in zip(ci, cj)]
            cols[j] = [(a // g) * v - (b // g) * u for u, v in zip(ci, cj)]
        if cols[i][i] == 0:
            raise ValueError(
                "lattice is not full rank; add p*(unit vectors) to work with L + pZ^n"
            )
        if cols[i][i] < 0:
            cols[i] = [-u for u in cols[i]]
        d = cols[i][i]
        for j in range(i):
            q = cols[j][i] // d
            if q:
                cols[j] = [u - q * v for u, v in zip(cols[j], cols[i])]
    return [[cols[j][i] for j in range(dim)] for i in range(dim)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


class IntLattice:
    """A full-rank lattice in Z^dim given by generating vectors."""

    __slots__ = ("dim", "basis", "hnf")

    def __init__(self, generators: Sequence[Sequence[int]], dim: int | None = None):
        generators = [list(map(int, g)) for g in generators]
        if dim is None:
            if not generators:
                raise ValueError("dimension required for an empty generator list")
            dim = len(generators[0])
        self.dim = int(dim)
        self.hnf = hermite_normal_form(generators, self.dim)
        self.basis = [[self.hnf[i][j] for i in range(self.dim)] for j in range(self.dim)]

    @property
    def det(self) -> int:
        out = 1
        for i in range(self.dim):
            out *= self.hnf[i][i]
        return out

    def reduce(self, vectors: np.ndarray) -> np.ndarray:
        """Canonical coset representatives: coordinate i lands in [0, H[i][i])."""
        v = np.array(vectors, dtype=object if self.det >= 1 << 62 else np.int64)
        H = self.hnf
        for i in range(self.dim):
            d = H[i][i]
            q = v[:, i] // d
            col = np.array([H[t][i] for t in range(self.dim)], dtype=v.dtype)
            v = v - q[:, None] * col[None, :]
        return v

    def contains(self, z: Sequence[int]) -> bool:
        return not self.reduce(np.array([list(z)])).any()

    def to_block(self, p: int, k: int, r: int) -> BlockLattice:
        """L + pZ^{kr} as a BlockLattice."""
        if k * r != self.dim:
            raise ValueError("k*r must equal the lattice dimension")
        return BlockLattice(p, k, r, [[x % p for x in b] for b in self.basis])

    def __repr__(self):
        return f"IntLattice(dim={self.dim}, det={self.det})"


@dataclass(frozen=True)
class ObliqueCheck:
    oblique: bool
    witness: tuple[int, ...] | None = None
    block: int | None = None

    def __bool__(self):
        return self.oblique


def is_p_oblique(L: BlockLattice | IntLattice, p: int | None = None, k: int | None = None, r: int | None = None) -> ObliqueCheck:
    """Check p-obliqueness, returning a witness lattice vector on failure.

    For each block i0, any nonzero vector of W whose other blocks vanish
    is a counterexample; one exists iff the generator columns outside block
    i0 have rank < dim W.
    """
    if isinstance(L, IntLattice):
        if p is None or k is None or r is None:
            raise ValueError("p, k and r are required for an IntLattice")
        L = L.to_block(p, k, r)
    d = L.dim_w
    if d == 0:
        return ObliqueCheck(True)
    G = L.gens
    for i0 in range(L.k):
        other = [c for c in range(L.dim) if c // L.r != i0]
        sub = FpMatrix(G.a[:, other], L.p)
        if sub.rank() < d:
            c = sub.T.nullspace().a[0]
            z = (c @ G.a) % L.p
            return ObliqueCheck(False, tuple(int(x) for x in z), i0)
    return ObliqueCheck(True)


def _keys_to_ints(keys: np.ndarray, radices: Sequence[int]):
    total = 1
    for m in radices:
        total *= int(m)
    if total < 1 << 62:
        weights = np.ones(len(radices), dtype=np.int64)
        for c in range(1, len(radices)):
            weights[c] = weights[c - 1] * int(radices[c - 1])
        return keys.astype(np.int64) @ weights
    return np.array([row.tobytes() for row in np.ascontiguousarray(keys, dtype=np.int64)], dtype=object)


def covering_number(L: BlockLattice | IntLattice, threads: int = 1) -> int:
    """C(L): the number of distinct cosets of L met by {0,1}^n."""
    n = L.dim
    _check_cube(n)
    if isinstance(L, BlockLattice):
        free = L.dim - L.dim_w
        radices = [L.p] * free
        keyfn = L.coset_keys
    else:
        radices = [L.hnf[i][i] for i in range(n)]
        keyfn = L.reduce

    def chunk(bounds):
        lo, hi = bounds
        return np.unique(_keys_to_ints(keyfn(cube_vertices(n, lo, hi)), radices))

    total = 1 << n
    ranges = [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk, ranges))
    else:
        parts = [chunk(b) for b in ranges]
    return int(np.unique(np.concatenate(parts)).size)


def example_lattice(k: int, r: int, p: int) -> BlockLattice:
    """{z : z_1j + ... + z_kj = 0 mod p for j = 1..r}; C = min((k+1)^r, p^r)."""
    n = k * r
    gens = []
    for i in range(1, k):
        for j in range(r):
            v = [0] * n
            v[j] = 1
            v[i * r + j] = -1
            gens.append(v)
    return BlockLattice(p, k, r, gens)


@dataclass(frozen=True)
class BasisSystem:
    """k bases B_1..B_k of F_p^r; ``bases[i][j]`` is the vector b_{i+1, j+1}."""

    p: int
    k: int
    r: int
    bases: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        bases = tuple(tuple(tuple(int(x) % self.p for x in v) for v in B) for B in self.bases)
        object.__setattr__(self, "bases", bases)
        if len(bases) != self.k:
            raise ValueError(f"expected {self.k} bases, got {len(bases)}")
        for i, B in enumerate(bases):
            if len(B) != self.r or any(len(v) != self.r for v in B):
                raise ValueError(f"B_{i + 1} must consist of {self.r} vectors of length {self.r}")
            if self.matrix(i).rank() != self.r:
                raise ValueError(f"B_{i + 1} is not a basis of F_{self.p}^{self.r}")

    def matrix(self, i: int) -> FpMatrix:
        """The r x r matrix whose columns are the vectors of B_{i+1}."""
        return FpMatrix(np.array(self.bases[i], dtype=np.int64).reshape(self.r, self.r).T, self.p)

    @classmethod
    def from_matrices(cls, mats: Sequence[FpMatrix]) -> "BasisSystem":
        p = mats[0].p
        r = mats[0].rows
        return cls(p, len(mats), r, tuple(tuple(tuple(int(x) for x in col) for col in M.a.T) for M in mats))

    def sumset_size(self) -> int:
        """|B_1* + ... + B_k*| measured in Z_p^r."""
        stars = [subset_sum_set(fp_multiset(self.p, B, self.r)) for B in self.bases]
        return len(sumset_many(stars))


def phi_apply(BS: BasisSystem, x: Sequence[int]) -> tuple[int, ...]:
    """sum_{i,j} x_ij b_ij over F_p."""
    if len(x) != BS.k * BS.r:
        raise ValueError(f"x must have length k*r = {BS.k * BS.r}")
    M = FpMatrix.hstack([BS.matrix(i) for i in range(BS.k)])
    return tuple(int(v) for v in (M.a @ (np.asarray(x, dtype=np.int64) % BS.p)) % BS.p)


def lattice_from_bases(BS: BasisSystem) -> BlockLattice:
    """Kernel of phi_B: W = ker [B_1 | ... | B_k] over F_p."""
    M = FpMatrix.hstack([BS.matrix(i) for i in range(BS.k)])
    return BlockLattice(BS.p, BS.k, BS.r, M.nullspace())


def lattice_leq(L1: BlockLattice, L2: BlockLattice, check_cover: bool = True) -> bool:
    """True iff L1 is a sublattice of L2 (W1 inside W2).

    When true and the cube is within the desk-scale cap, also confirms
    C(L2) <= C(L1).
    """
    if L1.params() != L2.params():
        raise ValueError(f"parameter mismatch: {L1.params()} vs {L2.params()}")
    if L1.dim_w == 0:
        inside = True
    else:
        stacked = FpMatrix(np.vstack([L2.gens.a, L1.gens.a]), L1.p)
        inside = stacked.rank() == L2.dim_w
    if inside and check_cover and L1.dim <= max_cube_dim():
        if covering_number(L2) > covering_number(L1):
            raise InvariantBreach("coarser lattice has a larger covering number")
    return inside

