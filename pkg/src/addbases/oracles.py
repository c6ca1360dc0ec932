"""Slow, independent reference computations used to cross-check fast paths.

None of these share code with the routes they check beyond the element
and lattice containers.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

from .groups import ElementMultiset, ElementSet, GroupElement
from .lattices import BlockLattice, cube_vertices
from .linalg import FpMatrix


def brute_subset_sums(B: ElementMultiset) -> ElementSet:
    """All 2^|B| subset sums, enumerated as 0/1 selection vectors."""
    group = B.group
    n = len(B)
    if n == 0:
        return ElementSet.zero(group)
    res = np.array([b.residues for b in B.items], dtype=np.int64)
    idx = np.arange(1 << n, dtype=np.int64)
    sel = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    sums = sel @ res
    return ElementSet.from_indices(group, group.index_of_residues(sums))


def brute_sumset(sets: list[ElementSet]) -> ElementSet:
    """Minkowski sum by enumerating every tuple of elements."""
    group = sets[0].group
    lists = [list(s) for s in sets]
    out = set()
    for combo in product(*lists):
        total = group.zero()
        for g in combo:
            total = total + g
        out.add(total.index)
    return ElementSet.from_indices(group, out)


def quadruple_energy(elements) -> int:
    """#{(a, b, c, d) : a + b = c + d} by enumerating all |B|^4 quadruples."""
    elems = list(elements)
    if elems and isinstance(elems[0], GroupElement):
        return sum(1 for a, b, c, d in product(elems, repeat=4) if a + b == c + d)
    return sum(
        1
        for a, b, c, d in product(elems, repeat=4)
        if tuple(x + y for x, y in zip(a, b)) == tuple(x + y for x, y in zip(c, d))
    )


def _parity_check(L: BlockLattice) -> np.ndarray:
    """Rows spanning the annihilator of W: z in W iff H z = 0 (mod p)."""
    if L.dim_w == 0:
        return np.eye(L.dim, dtype=np.int64)
    return L.gens.nullspace().a


def set_cover_covering_number(L: BlockLattice) -> int:
    """Minimum number of translates covering {0,1}^n, by exact set cover.

    Each translate v + L (v a vertex) covers the vertices u with
    u - v in L, decided by a parity check rather than coset keys.  The
    search branches on the lowest uncovered vertex over every distinct
    translate containing it and tracks the best cover found.
    """
    n = L.dim
    verts = cube_vertices(n)
    H = _parity_check(L)
    synd = (verts @ H.T) % L.p
    N = len(verts)
    cover = []
    for v in range(N):
        same = np.all(synd == synd[v], axis=1)
        cover.append(frozenset(np.flatnonzero(same).tolist()))
    candidates = sorted(set(cover), key=min)
    by_vertex: dict[int, list[frozenset]] = {v: [] for v in range(N)}
    for c in candidates:
        for v in c:
            by_vertex[v].append(c)

    best = [len(candidates)]

    def search(covered: frozenset, used: int) -> None:
        if used >= best[0]:
            return
        if len(covered) == N:
            best[0] = used
            return
        v = next(u for u in range(N) if u not in covered)
        for c in by_vertex[v]:
            search(covered | c, used + 1)

    search(frozenset(), 0)
    return best[0]


def brute_min_cover(L: BlockLattice) -> int:
    """Smallest s such that some s translates cover the cube (tiny cubes only)."""
    n = L.dim
    verts = cube_vertices(n)
    H = _parity_check(L)
    synd = [tuple(r) for r in (verts @ H.T) % L.p]
    full = set(range(len(verts)))
    translates = {}
    for v, s in enumerate(synd):
        translates.setdefault(s, set()).add(v)
    sets = list(translates.values())
    for size in range(1, len(sets) + 1):
        for combo in combinations(sets, size):
            if set().union(*combo) == full:
                return size
    return len(sets)


def cofactor_det(M: FpMatrix) -> int:
    """Determinant mod p by cofactor expansion (independent of elimination)."""
    a = M.a.tolist()
    p = M.p

    def det(rows):
        if len(rows) == 1:
            return rows[0][0]
        return sum(
            (-1) ** j * rows[0][j] * det([r[:j] + r[j + 1:] for r in rows[1:]])
            for j in range(len(rows))
        )

    return det(a) % p if a else 1
