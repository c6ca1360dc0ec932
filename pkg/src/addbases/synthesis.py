"""From a p-oblique lattice to a system of bases B with Lambda_B >= Lambda.

Pipeline::

    L-blocks  --find_A_blocks-->           A grid (A_ii = -I, sum_j A_ij L_j = 0)
              --invertible_combination-->  M_1..M_k, every B_j = sum_i M_i A_ij invertible
              -->                          sum_j B_j L_j = sum_i M_i sum_j A_ij L_j = 0

Everything is over the prime field F_p, so existence is guaranteed only for
k <= p.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    FieldTooSmallError,
    InconsistentSystemError,
    InvariantBreach,
    NotObliqueError,
    SynthesisError,
    max_cube_dim,
)
from .lattices import (
    BasisSystem,
    BlockLattice,
    covering_number,
    is_p_oblique,
    lattice_from_bases,
    lattice_leq,
)
from .linalg import FpMatrix, rowspace_inclusion_solve, strict_upper_triangularize

__all__ = [
    "SynthesisCertificate",
    "build_L_blocks",
    "find_A_blocks",
    "invertible_combination",
    "find_diagonal",
    "solve_block_relation",
    "bases_from_lattice",
]

log = logging.getLogger(__name__)

RANDOM_TRIALS = 64

Grid = list[list[FpMatrix]]


def build_L_blocks(L: BlockLattice) -> list[FpMatrix]:
    """L_i = (block i of the generator matrix)^T, an r x n matrix over F_p.

    n = dim W; when W = 0 a single zero column stands in for the
    generators of pZ^{kr}.
    """
    if L.dim_w == 0:
        return [FpMatrix.zeros(L.r, 1, L.p) for _ in range(L.k)]
    return [L.block(i).T for i in range(L.k)]


def find_A_blocks(L_blocks: Sequence[FpMatrix]) -> Grid:
    """A k x k grid of r x r blocks with A_ii = -I and sum_j A_ij L_j = 0."""
    k = len(L_blocks)
    r, p = L_blocks[0].rows, L_blocks[0].p
    grid: Grid = []
    for i in range(k):
        others = [L_blocks[j] for j in range(k) if j != i]
        try:
            coeffs = rowspace_inclusion_solve(L_blocks[i], others)
        except InconsistentSystemError as exc:
            row = exc.witness
            raise NotObliqueError(
                f"row {row} of L_{i + 1} is outside the row space of the other blocks: "
                "lattice not p-oblique",
                witness=tuple(int(x) for x in L_blocks[i].a[row]),
                block=i,
            ) from exc
        it = iter(coeffs)
        grid.append([-FpMatrix.identity(r, p) if j == i else next(it) for j in range(k)])
    return grid


def _column_B(M: Sequence[FpMatrix], A: Grid, j: int) -> FpMatrix:
    out = M[0] @ A[0][j]
    for i in range(1, len(M)):
        out = out + M[i] @ A[i][j]
    return out


def find_diagonal(
    B_blocks: Sequence[FpMatrix],
    U: FpMatrix,
    V: FpMatrix,
    A_row: Sequence[FpMatrix],
    p: int,
    rng: np.random.Generator | None = None,
    trials: int = RANDOM_TRIALS,
) -> tuple[int, ...]:
    """t in F_p^r with det(B_j + U diag(t) V A_row[j]) != 0 for every j.

    The product of these determinants is a nonzero polynomial of degree at
    most len(B_blocks) in each t_i; when that is below p a nonvanishing point
    exists.  Random trials come first, then an exhaustive sweep of F_p^r.
    """
    r = U.rows
    if rng is None:
        rng = np.random.default_rng(0)

    def good(t) -> bool:
        UDV = U @ FpMatrix.diag(t, p) @ V
        return all((B + UDV @ A).det() != 0 for B, A in zip(B_blocks, A_row))

    for _ in range(trials):
        t = tuple(int(x) for x in rng.integers(0, p, size=r))
        if good(t):
            return t
    for t in itertools.product(range(p), repeat=r):
        if good(t):
            return t
    raise SynthesisError("no diagonal D found on all of F_p^r")


def invertible_combination(
    A: Grid,
    p: int | None = None,
    rng: np.random.Generator | None = None,
    strict: bool = True,
) -> list[FpMatrix]:
    """M_1..M_k such that every B_j = sum_i M_i A_ij is invertible.

    Requires every A_ii invertible and p >= k.  With ``strict=False`` the
    field-size check is skipped and a failure surfaces as SynthesisError.
    """
    k = len(A)
    r = A[0][0].rows
    p = A[0][0].p if p is None else p
    if strict and p < k:
        raise FieldTooSmallError(f"need p >= k, got p = {p}, k = {k}")
    for i in range(k):
        if not A[i][i].is_invertible():
            raise ValueError(f"A_{i + 1}{i + 1} is singular")
    rng = np.random.default_rng(0) if rng is None else rng
    M = _combine(A, p, rng)
    for j in range(k):
        if not _column_B(M, A, j).is_invertible():
            raise InvariantBreach(f"invertible_combination produced a singular B_{j + 1}")
    return M


def _combine(A: Grid, p: int, rng: np.random.Generator) -> list[FpMatrix]:
    k = len(A)
    r = A[0][0].rows
    I, Z = FpMatrix.identity(r, p), FpMatrix.zeros(r, r, p)
    if k == 1:
        return [I]
    last = k - 1
    degenerate = [i for i in range(last) if not A[last][i].is_invertible()]
    if not degenerate:
        return [Z] * last + [I]
    i0 = degenerate[0]
    # simultaneous swap 0 <-> i0 keeps the A_ii on the diagonal
    perm = list(range(k))
    perm[0], perm[i0] = perm[i0], perm[0]
    Ap = [[A[perm[i]][perm[j]] for j in range(k)] for i in range(k)]
    if not all(Ap[i][i].is_invertible() for i in range(k)):
        raise InvariantBreach("relabelling broke the invertible diagonal")

    top = [row[:last] for row in Ap[:last]]
    Mp = _combine(top, p, rng)
    Bp = [_column_B(Mp, Ap[:last], j) for j in range(k)]
    N = Ap[last][0] @ Bp[0].inverse()
    U, V = strict_upper_triangularize(N)
    t = find_diagonal(Bp[1:], U, V, Ap[last][1:], p, rng)
    Mp = Mp + [U @ FpMatrix.diag(t, p) @ V]
    M = [None] * k
    for i in range(k):
        M[perm[i]] = Mp[i]
    return M


def solve_block_relation(L_blocks: Sequence[FpMatrix], p: int | None = None, rng=None, strict: bool = True) -> list[FpMatrix]:
    """Invertible B_1..B_k with B_1 L_1 + ... + B_k L_k = 0."""
    k = len(L_blocks)
    if k < 2:
        raise ValueError("need k >= 2 blocks")
    p = L_blocks[0].p if p is None else p
    r = L_blocks[0].rows
    if strict and p < k:
        raise FieldTooSmallError(f"need p >= k, got p = {p}, k = {k}")
    if all(L.is_zero() for L in L_blocks):
        return [FpMatrix.identity(r, p) for _ in range(k)]
    A = find_A_blocks(L_blocks)
    M = invertible_combination(A, p, rng=rng, strict=strict)
    B = [_column_B(M, A, j) for j in range(k)]
    residual = B[0] @ L_blocks[0]
    for j in range(1, k):
        residual = residual + B[j] @ L_blocks[j]
    if not residual.is_zero():
        raise InvariantBreach("sum_j B_j L_j is not zero")
    return B


@dataclass
class SynthesisCertificate:
    lattice: BlockLattice
    L_blocks: list[FpMatrix]
    A_blocks: Grid | None
    M_blocks: list[FpMatrix] | None
    B_blocks: list[FpMatrix]
    seed: int
    checks: dict[str, bool | None] = field(default_factory=dict)
    covering_numbers: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.checks.values())


def bases_from_lattice(L: BlockLattice, seed: int = 0, check_cover: bool = True) -> tuple[BasisSystem, SynthesisCertificate]:
    """A basis system B with Lambda_B >= L, plus a certificate of the checks."""
    verdict = is_p_oblique(L)
    if not verdict:
        raise NotObliqueError(
            f"lattice is not {L.p}-oblique (block {verdict.block + 1})",
            witness=verdict.witness,
            block=verdict.block,
        )
    if L.k > L.p:
        raise FieldTooSmallError(f"need k <= p, got k = {L.k}, p = {L.p}")
    rng = np.random.default_rng(seed)
    Ls = build_L_blocks(L)
    if all(X.is_zero() for X in Ls):
        A = M = None
        B = [FpMatrix.identity(L.r, L.p) for _ in range(L.k)]
    else:
        A = find_A_blocks(Ls)
        M = invertible_combination(A, L.p, rng=rng)
        B = [_column_B(M, A, j) for j in range(L.k)]
    BS = BasisSystem.from_matrices(B)
    LB = lattice_from_bases(BS)
    residual = B[0] @ Ls[0]
    for j in range(1, L.k):
        residual = residual + B[j] @ Ls[j]
    cert = SynthesisCertificate(L, Ls, A, M, B, seed)
    cert.checks["all_B_invertible"] = all(X.is_invertible() for X in B)
    cert.checks["residual_zero"] = residual.is_zero()
    cert.checks["lattice_contained"] = lattice_leq(L, LB, check_cover=False)
    if check_cover and L.dim <= max_cube_dim():
        c_in, c_out = covering_number(L), covering_number(LB)
        cert.covering_numbers = {"input": c_in, "synthesized": c_out}
        cert.checks["covering_not_larger"] = c_out <= c_in
    else:
        cert.checks["covering_not_larger"] = None
    if not cert.ok:
        raise InvariantBreach(f"synthesis certificate failed: {cert.checks}")
    log.debug("synthesized bases for %r", L)
    return BS, cert
