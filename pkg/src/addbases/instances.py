"""Seeded random instances: groups, generating multisets, bases, lattices.

Every generator takes a ``numpy.random.Generator`` so one seed per
invocation determines everything downstream.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Iterator

import numpy as np

from .groups import ElementMultiset, ElementSet, GroupSpec, elem_from_index, generates
from .lattices import BasisSystem, BlockLattice, is_p_oblique
from .linalg import FpMatrix, rank_of_vectors

__all__ = [
    "groups_up_to",
    "random_subset",
    "random_generating_multiset",
    "random_basis",
    "random_basis_system",
    "random_oblique_lattice",
    "random_rational_system",
    "iter_subspaces",
    "rational_ranks",
]


def groups_up_to(max_order: int) -> Iterator[GroupSpec]:
    """Every non-decreasing list of cyclic factors >= 2 with product <= max_order.

    Isomorphic groups appear once per factorisation (Z_6 and Z_2 x Z_3
    are both listed).
    """

    def rec(prefix: list[int], lo: int, prod: int):
        if prefix:
            yield GroupSpec(tuple(prefix))
        m = lo
        while prod * m <= max_order:
            yield from rec(prefix + [m], m, prod * m)
            m += 1

    yield from rec([], 2, 1)


def random_subset(rng: np.random.Generator, group: GroupSpec, size: int | None = None) -> ElementSet:
    """A uniformly random non-empty subset (of random size unless given)."""
    n = group.order
    if size is None:
        size = int(rng.integers(1, n + 1))
    idx = rng.choice(n, size=size, replace=False)
    return ElementSet.from_indices(group, idx)


def random_generating_multiset(
    rng: np.random.Generator, group: GroupSpec, max_extra: int = 2, tries: int = 1000
) -> ElementMultiset:
    """A random multiset of rank(G) .. rank(G) + max_extra elements that generates G."""
    for _ in range(tries):
        size = group.rank + int(rng.integers(0, max_extra + 1))
        idx = rng.integers(0, group.order, size=size)
        B = ElementMultiset(group, tuple(elem_from_index(group, int(i)) for i in idx))
        if generates(B):
            return B
    raise RuntimeError(f"no generating multiset of {group} found in {tries} tries")


def random_basis(rng: np.random.Generator, p: int, r: int) -> tuple[tuple[int, ...], ...]:
    """r random vectors forming a basis of F_p^r (rejection sampling)."""
    while True:
        M = rng.integers(0, p, size=(r, r))
        if FpMatrix(M, p).rank() == r:
            return tuple(tuple(int(x) for x in row) for row in M)


def random_basis_system(rng: np.random.Generator, p: int, k: int, r: int) -> BasisSystem:
    return BasisSystem(p, k, r, tuple(random_basis(rng, p, r) for _ in range(k)))


def random_oblique_lattice(
    rng: np.random.Generator,
    p: int,
    k: int,
    r: int,
    dim_w: int | None = None,
    tries: int = 10_000,
) -> BlockLattice:
    """Rejection-sample a p-oblique BlockLattice with a random W.

    ``dim_w`` defaults to a uniform draw from [0, (k-1) r]; larger
    subspaces always meet some coordinate block and are never oblique.
    """
    n = k * r
    for _ in range(tries):
        d = int(rng.integers(0, (k - 1) * r + 1)) if dim_w is None else dim_w
        L = BlockLattice(p, k, r, rng.integers(0, p, size=(d, n)) if d else [])
        if L.dim_w == d and is_p_oblique(L):
            return L
    raise RuntimeError("could not sample an oblique lattice within the try budget")


def random_rational_system(
    rng: np.random.Generator, k: int, n: int, max_size: int | None = None, entries: int = 2
) -> list[list[tuple[int, ...]]]:
    """k random non-empty sets of integer vectors in Q^n with small entries.

    Sets may contain dependent vectors, so their ranks vary.
    """
    max_size = n if max_size is None else max_size
    out = []
    for _ in range(k):
        size = int(rng.integers(1, max_size + 1))
        vecs = []
        while len(vecs) < size:
            v = tuple(int(x) for x in rng.integers(-entries, entries + 1, size=n))
            if any(v):
                vecs.append(v)
        out.append(vecs)
    return out


def iter_subspaces(n: int, d: int, p: int) -> Iterator[np.ndarray]:
    """Every d-dimensional subspace of F_p^n, as its RREF basis (d x n)."""
    for pivots in combinations(range(n), d):
        free_slots = [
            (i, c) for i, pc in enumerate(pivots) for c in range(pc + 1, n) if c not in pivots
        ]
        for values in product(range(p), repeat=len(free_slots)):
            M = np.zeros((d, n), dtype=np.int64)
            for i, pc in enumerate(pivots):
                M[i, pc] = 1
            for (i, c), v in zip(free_slots, values):
                M[i, c] = v
            yield M


def rational_ranks(system) -> list[int]:
    return [rank_of_vectors(B)[0] for B in system]
