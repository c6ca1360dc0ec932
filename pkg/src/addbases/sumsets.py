"""Subset-sum sets, sumsets, additive bases and the growth chain S_j.

Two carriers are supported:

* :class:`~addbases.groups.ElementSet` for finite abelian groups (including
  F_p^n as Z_p^n), used for everything exact and exhaustive;
* plain integer/rational vectors for characteristic zero, where sets are
  held as numpy arrays of injectively encoded integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import GroupMismatchError, InvariantBreach
from .groups import (
    ElementMultiset,
    ElementSet,
    GroupElement,
    GroupSpec,
    _translate,
    elem_from_index,
    generates,
    vector_space,
)

__all__ = [
    "subset_sum_set",
    "subset_sum_indices",
    "sumset",
    "sumset_many",
    "iterated_sumset",
    "is_additive_basis",
    "basis_threshold",
    "GrowthTrace",
    "growth_trace",
    "growth_step_holds",
    "halving_complete",
    "ruzsa_triangle_check",
    "fp_multiset",
    "char0_subset_sum_size",
    "char0_sumset_size",
    "Char0Sumset",
]


def subset_sum_set(B: ElementMultiset, track: bool = False):
    """B* = {sum(A) : A a sub-multiset of B}, always containing 0.

    Computed incrementally as S <- S | (S + b) over the items of B in
    ascending element-index order.  With ``track=True`` also returns
    ``(parent, item)`` arrays: for each reached index x != 0, ``parent[x]``
    is the index of x - b and ``item[x]`` the original position of b in B,
    where b is the item that first reached x.
    """
    group = B.group
    group.check_enumerable()
    mask = np.zeros(group.order, dtype=bool)
    mask[0] = True
    if track:
        parent = np.full(group.order, -1, dtype=np.int64)
        item = np.full(group.order, -1, dtype=np.int64)
        arange = np.arange(group.order, dtype=np.int64)
    for pos, b in B.sorted_items():
        if b.is_zero():
            continue
        shifted = _translate(group, mask, b.residues)
        if track:
            new = shifted & ~mask
            parent[new] = _translate(group, arange, b.residues)[new]
            item[new] = pos
        mask = mask | shifted
        if mask.all() and not track:
            break
    out = ElementSet(group, mask)
    if track:
        return out, parent, item
    return out


def subset_sum_indices(B: ElementMultiset) -> np.ndarray:
    """Sorted element indices of B*, without a dense mask over G.

    Cost scales with |B*| rather than |G|, so this works for groups far
    beyond the enumeration cap as long as B* itself is small.
    """
    group = B.group
    moduli = np.array(group.moduli, dtype=np.int64)
    S = np.zeros((1, group.ndim), dtype=np.int64)
    for _, b in B.sorted_items():
        if b.is_zero():
            continue
        moved = (S + np.array(b.residues, dtype=np.int64)) % moduli
        S = np.unique(np.concatenate([S, moved]), axis=0)
    return np.sort(group.index_of_residues(S))


def _subset_from_track(B: ElementMultiset, parent: np.ndarray, item: np.ndarray, x: int) -> list[GroupElement]:
    positions = []
    while x != 0:
        positions.append(int(item[x]))
        x = int(parent[x])
    return [B.items[i] for i in sorted(positions)]


def sumset(S: ElementSet, T: ElementSet) -> ElementSet:
    return S.sumset(T)


def sumset_many(sets: Sequence[ElementSet]) -> ElementSet:
    if not sets:
        raise ValueError("empty list of sets")
    out = sets[0]
    for s in sets[1:]:
        out = out.sumset(s)
    return out


def iterated_sumset(n: int, S: ElementSet) -> ElementSet:
    """nS = S + ... + S (n copies), by repeated doubling."""
    if n < 1:
        raise ValueError("n must be >= 1")
    result = None
    power = S
    while n:
        if n & 1:
            result = power if result is None else result.sumset(power)
        n >>= 1
        if n:
            power = power.sumset(power)
    return result


def is_additive_basis(
    Bs: Sequence[ElementMultiset], witness: GroupElement | Sequence[int] | None = None
) -> tuple[bool, list[list[GroupElement]] | None]:
    """Decide whether B_1* + ... + B_k* = G.

    If ``witness`` names a target g that lies in the sumset, the second
    return value is a list of sub-multisets A_i of B_i with
    g = sum_i sum(A_i); it is None otherwise.  Going backwards from j = k,
    each step picks the lowest-index t in B_j* with g - t in S_{j-1}.
    """
    if not Bs:
        raise ValueError("need at least one multiset")
    group = Bs[0].group
    for B in Bs:
        if B.group != group:
            raise GroupMismatchError("all multisets must live in the same group")
    tracked = []
    prefix = [ElementSet.zero(group)]
    for B in Bs:
        if prefix[-1].is_full() and witness is None:
            prefix.append(prefix[-1])
            tracked.append(None)
            continue
        star, parent, item = subset_sum_set(B, track=True)
        tracked.append((star, parent, item))
        prefix.append(prefix[-1].sumset(star))
    ok = prefix[-1].is_full()
    if witness is None:
        return ok, None
    g = witness if isinstance(witness, GroupElement) else group.element(witness)
    if g not in prefix[-1]:
        return ok, None
    parts: list[list[GroupElement]] = []
    x = g
    for j in range(len(Bs), 0, -1):
        star, parent, item = tracked[j - 1]
        prev = prefix[j - 1]
        for t_idx in star.indices():
            t = elem_from_index(group, int(t_idx))
            if (x - t) in prev:
                parts.append(_subset_from_track(Bs[j - 1], parent, item, int(t_idx)))
                x = x - t
                break
        else:  # pragma: no cover - would contradict g in S_k
            raise InvariantBreach("witness reconstruction lost the target")
    parts.reverse()
    return ok, parts


def basis_threshold(G: GroupSpec) -> int:
    """Least integer k with k > 2 m ln(log2 |G|), m the exponent of G."""
    if G.order < 2:
        raise ValueError("the group must be non-trivial")
    if G.order == 2:
        return 1
    with mpmath.workdps(60):
        x = 2 * G.exponent * mpmath.log(mpmath.log(G.order, 2))
        k = int(mpmath.floor(x)) + 1
        if abs(x - mpmath.nint(x)) < mpmath.mpf(10) ** -40:
            raise ArithmeticError(f"threshold {x} too close to an integer to decide")
    return k


def growth_step_holds(prev: int, cur: int, order: int, m: int) -> bool:
    """|S_j|^(m-1) >= |S_{j-1}|^(m-2) |G|, decided without rounding error.

    Exact integers are used unless the powers would be enormous, in which
    case the logarithmic form is compared with outward-rounded intervals.
    """
    bits = (m - 1) * max(cur, prev, order).bit_length()
    if bits <= 1 << 18:
        return cur ** (m - 1) >= prev ** (m - 2) * order
    iv = mpmath.iv
    saved = iv.prec
    try:
        for prec in (113, 256, 1024):
            iv.prec = prec
            lhs = (m - 1) * iv.log(iv.mpf(cur))
            rhs = (m - 2) * iv.log(iv.mpf(prev)) + iv.log(iv.mpf(order))
            if lhs.a >= rhs.b:
                return True
            if lhs.b < rhs.a:
                return False
    finally:
        iv.prec = saved
    return cur ** (m - 1) >= prev ** (m - 2) * order


@dataclass
class GrowthTrace:
    """Sizes |S_j| of the partial sumsets S_j = B_1* + ... + B_j*.

    ``per_step_ok[j-2]`` records the growth inequality at step j (j >= 2);
    ``calculus_ok[j-1]`` records ln(|G|/|S_j|) < exp(-(j+1)/m) ln|G|.
    """

    sizes: list[int]
    group_order: int
    exponent: int
    rank: int
    per_step_ok: list[bool] = field(default_factory=list)
    s1_ok: bool = True
    calculus_ok: list[bool] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(self.per_step_ok) and self.s1_ok and all(self.calculus_ok)


def growth_trace(Bs: Sequence[ElementMultiset], require_generating: bool = True) -> GrowthTrace:
    if not Bs:
        raise ValueError("need at least one multiset")
    group = Bs[0].group
    m = group.exponent
    if m == 2:
        raise ValueError("growth chain needs exponent >= 3; exponent 2 is immediate")
    if require_generating:
        for i, B in enumerate(Bs):
            if not generates(B):
                raise ValueError(f"B_{i + 1} does not generate {group}")
    order = group.order
    sizes = []
    S = ElementSet.zero(group)
    for B in Bs:
        if B.group != group:
            raise GroupMismatchError("all multisets must live in the same group")
        if not S.is_full():
            S = S.sumset(subset_sum_set(B))
        sizes.append(len(S))
    steps = [growth_step_holds(sizes[j - 1], sizes[j], order, m) for j in range(1, len(sizes))]
    s1_ok = sizes[0] >= 2 ** group.rank
    with mpmath.workdps(40):
        lng = mpmath.log(order)
        calc = [
            mpmath.log(mpmath.mpf(order) / s) < mpmath.exp(-mpmath.mpf(j + 1) / m) * lng
            for j, s in enumerate(sizes, start=1)
        ]
    return GrowthTrace(sizes, order, m, group.rank, steps, s1_ok, [bool(c) for c in calc])


def halving_complete(S: ElementSet, T: ElementSet) -> bool:
    """True iff |S| + |T| > |G|; in that case S + T = G is also verified."""
    if S.group != T.group:
        raise GroupMismatchError("sets over different groups")
    if len(S) + len(T) <= S.group.order:
        return False
    if not S.sumset(T).is_full():
        raise InvariantBreach("|S|+|T| > |G| but S+T != G")
    return True


def ruzsa_triangle_check(sets: Sequence[ElementSet]) -> bool:
    """|A_0|^(n-1) |A_1 + ... + A_n| <= |A_0 + A_1| ... |A_0 + A_n|."""
    if len(sets) < 2:
        raise ValueError("need A_0 and at least one A_i")
    if any(len(s) == 0 for s in sets):
        raise ValueError("Ruzsa's inequality needs non-empty sets")
    A0, rest = sets[0], list(sets[1:])
    n = len(rest)
    lhs = len(A0) ** (n - 1) * len(sumset_many(rest))
    rhs = math.prod(len(A0.sumset(A)) for A in rest)
    return lhs <= rhs


def fp_multiset(p: int, vectors: Sequence[Sequence[int]], n: int | None = None) -> ElementMultiset:
    """A list of vectors over F_p as a multiset in Z_p^n."""
    vectors = [tuple(int(x) % p for x in v) for v in vectors]
    if n is None:
        if not vectors:
            raise ValueError("dimension needed for an empty vector list")
        n = len(vectors[0])
    return ElementMultiset(vector_space(p, n), tuple(vectors))


# ---------------------------------------------------------------------------
# characteristic zero


class Char0Sumset:
    """Sumsets of finite vector sets over Q, via an injective integer encoding.

    All vectors of all sets are scaled by a common denominator and mapped to
    integers by x -> sum_c x_c W^c, with W larger than twice any coordinate
    any sum can reach; this map is additive and injective on the reachable
    box, so set sizes are preserved.
    """

    def __init__(self, families: Sequence[Sequence[Sequence]]):
        vecs = [[tuple(Fraction(x) for x in v) for v in fam] for fam in families]
        dims = {len(v) for fam in vecs for v in fam}
        if len(dims) > 1:
            raise ValueError("vectors of differing dimension")
        self.dim = dims.pop() if dims else 0
        den = 1
        for fam in vecs:
            for v in fam:
                for x in v:
                    den = math.lcm(den, x.denominator)
        self.families = [[tuple(int(x * den) for x in v) for v in fam] for fam in vecs]
        reach = [0] * self.dim
        for fam in self.families:
            for v in fam:
                for c, x in enumerate(v):
                    reach[c] += abs(x)
        self.base = 2 * max(reach, default=0) + 1
        big = self.base ** max(self.dim, 1) >= 1 << 62
        self._dtype = object if big else np.int64

    def encode(self, v: Sequence[int]) -> int:
        return sum(int(x) * self.base**c for c, x in enumerate(v))

    def star(self, i: int) -> np.ndarray:
        s = np.zeros(1, dtype=self._dtype)
        for v in self.families[i]:
            e = self.encode(v)
            s = np.unique(np.concatenate([s, s + e]))
        return s

    def sumset(self, indices: Iterable[int] | None = None) -> np.ndarray:
        idx = range(len(self.families)) if indices is None else indices
        acc = np.zeros(1, dtype=self._dtype)
        for i in idx:
            acc = np.unique(np.add.outer(acc, self.star(i)).reshape(-1))
        return acc


def char0_subset_sum_size(vectors: Sequence[Sequence]) -> int:
    return int(Char0Sumset([vectors]).star(0).size)


def char0_sumset_size(families: Sequence[Sequence[Sequence]]) -> int:
    """|B_1* + ... + B_k*| for finite sets of rational vectors."""
    return int(Char0Sumset(families).sumset().size)
