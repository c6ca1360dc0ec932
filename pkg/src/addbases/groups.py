"""Finite abelian groups given as products of cyclic groups.

Elements are residue vectors ``(g_0, ..., g_{t-1})`` with ``0 <= g_a < m_a``.
The index of an element is its mixed-radix value with factor 0 as the
fastest axis::

    index(g) = g_0 + m_0 * (g_1 + m_1 * (g_2 + ...))

Dense masks (:class:`ElementSet`) are stored as flat boolean arrays in that
index order, so a mask is byte-stable for a given list of moduli.  For
translations the flat mask is viewed as a C-ordered array of shape
``(m_{t-1}, ..., m_0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    MAX_EXACT_ORDER,
    DeskScaleError,
    GroupMismatchError,
    max_order,
)

__all__ = [
    "GroupSpec",
    "GroupElement",
    "ElementSet",
    "ElementMultiset",
    "group_make",
    "vector_space",
    "invariant_factors",
    "elem_add",
    "elem_neg",
    "elem_scale",
    "elem_index",
    "elem_from_index",
    "generates",
    "subgroup_closure",
    "subgroup_index",
    "convolution_counts",
]

# Below this many translates a direct roll-and-accumulate beats an FFT.
_ROLL_LIMIT = 48


def invariant_factors(moduli: Sequence[int]) -> tuple[int, ...]:
    """Canonical invariant factors ``d_1 | d_2 | ... | d_s`` (all > 1).

    Uses Z_a x Z_b ~ Z_gcd(a,b) x Z_lcm(a,b) repeatedly, so no factoring
    is needed.

    >>> invariant_factors([2, 6])
    (2, 6)
    >>> invariant_factors([4, 6, 9])
    (3, 6, 36)
    """
    ms = [int(m) for m in moduli]
    n = len(ms)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = ms[i], ms[j]
            g = math.gcd(a, b)
            ms[i], ms[j] = g, a // g * b
    return tuple(m for m in ms if m > 1)


@dataclass(frozen=True)
class GroupSpec:
    """Z_{m_0} x ... x Z_{m_{t-1}} with every m_a >= 2."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        moduli = tuple(int(m) for m in self.moduli)
        object.__setattr__(self, "moduli", moduli)
        if not moduli:
            raise ValueError("a group needs at least one cyclic factor")
        for m in moduli:
            if m < 2:
                raise ValueError(f"cyclic factor orders must be >= 2, got {m}")
        order = 1
        for m in moduli:
            order *= m
            if order > MAX_EXACT_ORDER:
                raise OverflowError("group order exceeds the exact-integer range")

    @cached_property
    def order(self) -> int:
        return math.prod(self.moduli)

    @cached_property
    def exponent(self) -> int:
        return reduce(math.lcm, self.moduli, 1)

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        return invariant_factors(self.moduli)

    @property
    def rank(self) -> int:
        """Minimal number of generators."""
        return len(self.invariant_factors)

    @property
    def ndim(self) -> int:
        return len(self.moduli)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out, s = [], 1
        for m in self.moduli:
            out.append(s)
            s *= m
        return tuple(out)

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of the C-ordered array view of a mask."""
        return tuple(reversed(self.moduli))

    def check_enumerable(self) -> None:
        cap = max_order()
        if self.order > cap:
            raise DeskScaleError(
                f"group order {self.order} exceeds desk-scale cap {cap} "
                "(set ADDBASES_MAX_ORDER to override)"
            )

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.ndim)

    def element(self, residues: Iterable[int] | int) -> "GroupElement":
        if isinstance(residues, (int, np.integer)):
            residues = (int(residues),)
        return GroupElement(self, tuple(residues))

    def elements(self) -> Iterator["GroupElement"]:
        for i in range(self.order):
            yield elem_from_index(self, i)

    def digits(self) -> np.ndarray:
        """Array of shape (order, ndim) holding the residues of every index."""
        self.check_enumerable()
        idx = np.arange(self.order, dtype=np.int64)
        cols = [(idx // s) % m for s, m in zip(self.strides, self.moduli)]
        return np.stack(cols, axis=1)

    def index_of_residues(self, residues: np.ndarray) -> np.ndarray:
        """Vectorised mixed-radix encoding of an (N, ndim) residue array."""
        residues = np.asarray(residues, dtype=np.int64) % np.array(self.moduli)
        return residues @ np.array(self.strides, dtype=np.int64)

    def __str__(self):
        return " x ".join(f"Z_{m}" for m in self.moduli)


def group_make(moduli: Sequence[int]) -> GroupSpec:
    return GroupSpec(tuple(moduli))


def vector_space(p: int, n: int) -> GroupSpec:
    """F_p^n viewed as the additive group Z_p^n."""
    return GroupSpec((p,) * n)


@dataclass(frozen=True)
class GroupElement:
    group: GroupSpec
    residues: tuple[int, ...]

    def __post_init__(self):
        res = tuple(int(x) for x in self.residues)
        if len(res) != self.group.ndim:
            raise ValueError(
                f"expected {self.group.ndim} residues for {self.group}, got {len(res)}"
            )
        res = tuple(x % m for x, m in zip(res, self.group.moduli))
        object.__setattr__(self, "residues", res)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return elem_add(self, other)

    def __neg__(self) -> "GroupElement":
        return elem_neg(self)

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return elem_add(self, elem_neg(other))

    def __rmul__(self, c: int) -> "GroupElement":
        return elem_scale(c, self)

    @property
    def index(self) -> int:
        return elem_index(self)

    def is_zero(self) -> bool:
        return not any(self.residues)

    def __repr__(self):
        return f"GroupElement{self.residues}"


def _same_group(g: GroupElement, h: GroupElement) -> None:
    if g.group != h.group:
        raise GroupMismatchError(f"elements of {g.group} and {h.group} cannot be combined")


def elem_add(g: GroupElement, h: GroupElement) -> GroupElement:
    _same_group(g, h)
    return GroupElement(g.group, tuple(a + b for a, b in zip(g.residues, h.residues)))


def elem_neg(g: GroupElement) -> GroupElement:
    return GroupElement(g.group, tuple(-a for a in g.residues))


def elem_scale(c: int, g: GroupElement) -> GroupElement:
    return GroupElement(g.group, tuple(c * a for a in g.residues))


def elem_index(g: GroupElement) -> int:
    return sum(a * s for a, s in zip(g.residues, g.group.strides))


def elem_from_index(group: GroupSpec, i: int) -> GroupElement:
    i = int(i)
    if not 0 <= i < group.order:
        raise IndexError(f"index {i} out of range for group of order {group.order}")
    res = []
    for m in group.moduli:
        i, r = divmod(i, m)
        res.append(r)
    return GroupElement(group, tuple(res))


# ---------------------------------------------------------------------------
# dense sets


def _as_residues(group: GroupSpec, item) -> tuple[int, ...]:
    if isinstance(item, GroupElement):
        if item.group != group:
            raise GroupMismatchError(f"element of {item.group} used in {group}")
        return item.residues
    return GroupElement(group, (item,) if isinstance(item, (int, np.integer)) else item).residues


def _translate(group: GroupSpec, mask: np.ndarray, residues: Sequence[int]) -> np.ndarray:
    shifts = tuple(reversed(residues))
    axes = tuple(a for a, s in enumerate(shifts) if s)
    if not axes:
        return mask
    view = mask.reshape(group.shape)
    out = np.roll(view, tuple(shifts[a] for a in axes), axis=axes)
    return out.reshape(-1)


def convolution_counts(A: "ElementSet", B: "ElementSet") -> np.ndarray:
    """nu_{A+B}(z) = #{(a, b) in A x B : a + b = z} for every z, as int64.

    Small operands are handled by summing translates; otherwise an FFT over
    the group's cyclic axes is used, and its rounding is checked so the
    result stays exact.
    """
    if A.group != B.group:
        raise GroupMismatchError("convolution of sets from different groups")
    group = A.group
    if len(B) > len(A):
        A, B = B, A
    if len(B) <= _ROLL_LIMIT:
        return _roll_counts(A, B)
    shape = group.shape
    fa = np.fft.rfftn(A.mask.reshape(shape).astype(np.float64))
    fb = np.fft.rfftn(B.mask.reshape(shape).astype(np.float64))
    raw = np.fft.irfftn(fa * fb, s=shape, axes=tuple(range(len(shape)))).reshape(-1)
    counts = np.rint(raw)
    if np.max(np.abs(raw - counts), initial=0.0) > 0.25:
        return _roll_counts(A, B)
    return counts.astype(np.int64)


def _roll_counts(A: "ElementSet", B: "ElementSet") -> np.ndarray:
    base = A.mask.astype(np.int64)
    acc = np.zeros(A.group.order, dtype=np.int64)
    for idx in B.indices():
        acc += _translate(A.group, base, elem_from_index(A.group, int(idx)).residues)
    return acc


class ElementSet:
    """A subset of a finite abelian group stored as a dense indicator mask."""

    __slots__ = ("group", "mask", "_card")

    def __init__(self, group: GroupSpec, mask: np.ndarray):
        group.check_enumerable()
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if mask.size != group.order:
            raise ValueError(f"mask length {mask.size} != group order {group.order}")
        mask = mask.copy()
        mask.setflags(write=False)
        self.group = group
        self.mask = mask
        self._card = int(np.count_nonzero(mask))

    # construction

    @classmethod
    def empty(cls, group: GroupSpec) -> "ElementSet":
        return cls(group, np.zeros(group.order, dtype=bool))

    @classmethod
    def zero(cls, group: GroupSpec) -> "ElementSet":
        m = np.zeros(group.order, dtype=bool)
        m[0] = True
        return cls(group, m)

    @classmethod
    def full(cls, group: GroupSpec) -> "ElementSet":
        return cls(group, np.ones(group.order, dtype=bool))

    @classmethod
    def from_elements(cls, group: GroupSpec, items: Iterable) -> "ElementSet":
        m = np.zeros(group.order, dtype=bool)
        for it in items:
            res = _as_residues(group, it)
            m[sum(a * s for a, s in zip(res, group.strides))] = True
        return cls(group, m)

    @classmethod
    def from_indices(cls, group: GroupSpec, indices: Iterable[int]) -> "ElementSet":
        m = np.zeros(group.order, dtype=bool)
        m[np.fromiter((int(i) for i in indices), dtype=np.int64)] = True
        return cls(group, m)

    # queries

    def __len__(self) -> int:
        return self._card

    def __contains__(self, item) -> bool:
        res = _as_residues(self.group, item)
        return bool(self.mask[sum(a * s for a, s in zip(res, self.group.strides))])

    def __iter__(self) -> Iterator[GroupElement]:
        for i in self.indices():
            yield elem_from_index(self.group, int(i))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ElementSet):
            return NotImplemented
        return self.group == other.group and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.group, self.mask.tobytes()))

    def __repr__(self):
        return f"ElementSet({self.group}, size={len(self)})"

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def is_full(self) -> bool:
        return self._card == self.group.order

    def issubset(self, other: "ElementSet") -> bool:
        self._check(other)
        return not bool(np.any(self.mask & ~other.mask))

    # operations

    def _check(self, other: "ElementSet") -> None:
        if self.group != other.group:
            raise GroupMismatchError(f"sets over {self.group} and {other.group}")

    def __or__(self, other: "ElementSet") -> "ElementSet":
        self._check(other)
        return ElementSet(self.group, self.mask | other.mask)

    def __and__(self, other: "ElementSet") -> "ElementSet":
        self._check(other)
        return ElementSet(self.group, self.mask & other.mask)

    def translate(self, g) -> "ElementSet":
        res = _as_residues(self.group, g)
        return ElementSet(self.group, _translate(self.group, self.mask, res))

    def negate(self) -> "ElementSet":
        view = self.mask.reshape(self.group.shape)
        flipped = np.roll(np.flip(view), 1, axis=tuple(range(view.ndim)))
        return ElementSet(self.group, flipped.reshape(-1))

    def sumset(self, other: "ElementSet") -> "ElementSet":
        self._check(other)
        A, B = (self, other) if len(self) >= len(other) else (other, self)
        if len(B) == 0:
            return ElementSet.empty(self.group)
        if len(B) <= _ROLL_LIMIT:
            acc = np.zeros(self.group.order, dtype=bool)
            for idx in B.indices():
                res = elem_from_index(self.group, int(idx)).residues
                acc |= _translate(self.group, A.mask, res)
                if acc.all():
                    break
            return ElementSet(self.group, acc)
        return ElementSet(self.group, convolution_counts(A, B) > 0)

    __add__ = sumset


@dataclass(frozen=True)
class ElementMultiset:
    """A finite multiset of group elements (duplicates allowed)."""

    group: GroupSpec
    items: tuple[GroupElement, ...] = field(default_factory=tuple)

    def __post_init__(self):
        items = tuple(
            it if isinstance(it, GroupElement) else self.group.element(it) for it in self.items
        )
        for it in items:
            if it.group != self.group:
                raise GroupMismatchError(f"element of {it.group} in multiset over {self.group}")
        object.__setattr__(self, "items", items)

    @classmethod
    def of(cls, group: GroupSpec, items: Iterable) -> "ElementMultiset":
        return cls(group, tuple(items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.items)

    def __add__(self, other: "ElementMultiset") -> "ElementMultiset":
        if self.group != other.group:
            raise GroupMismatchError("multiset union across groups")
        return ElementMultiset(self.group, self.items + other.items)

    def sorted_items(self) -> list[tuple[int, GroupElement]]:
        """(original position, element) pairs in ascending element-index order."""
        return sorted(enumerate(self.items), key=lambda pe: (pe[1].index, pe[0]))

    def support(self) -> ElementSet:
        return ElementSet.from_elements(self.group, self.items)


def subgroup_closure(B: ElementMultiset | Iterable[GroupElement], group: GroupSpec | None = None) -> ElementSet:
    """The subgroup generated by B: closure of {0} and B under addition.

    H <- H + H from H = {0} | B stabilises after about log2 |G| rounds; a
    set containing 0 with H + H = H is a subgroup of a finite group.
    """
    if isinstance(B, ElementMultiset):
        group, items = B.group, list(B.items)
    else:
        items = list(B)
        if group is None:
            if not items:
                raise ValueError("group must be given for an empty generator list")
            group = items[0].group
    group.check_enumerable()
    H = ElementSet.from_elements(group, [group.zero(), *items])
    while True:
        nxt = H.sumset(H)
        if nxt == H:
            return H
        H = nxt


def subgroup_index(B: ElementMultiset | Iterable[GroupElement], group: GroupSpec | None = None) -> int:
    """[G : <B>], computed without enumerating G.

    <B> is the image of the lattice spanned by the residue vectors of B and
    the relations m_i e_i, so the index is that lattice's determinant,
    found by gcd elimination column by column.
    """
    if isinstance(B, ElementMultiset):
        group, items = B.group, list(B.items)
    else:
        items = list(B)
        if group is None:
            raise ValueError("group must be given")
    moduli = group.moduli
    t = len(moduli)
    rows = [list(g.residues) for g in items if not g.is_zero()]
    rows += [[m if j == i else 0 for j in range(t)] for i, m in enumerate(moduli)]
    index = 1
    for c in range(t):
        pivot = None
        rest = []
        for row in rows:
            if row[c] == 0:
                rest.append(row)
                continue
            if pivot is None:
                pivot = row
                continue
            a, b = pivot, row
            while b[c]:
                q = a[c] // b[c]
                a = [x - q * y for x, y in zip(a, b)]
                a, b = b, a
            pivot = a
            rest.append(b)
        index *= abs(pivot[c])
        # m_j e_j lies in the lattice, so later coordinates may be reduced
        # mod m_j provided those relation rows are kept
        rows = [[x % moduli[j] if j > c else x for j, x in enumerate(row)] for row in rest]
        rows = [row for row in rows if any(row)]
        rows += [[m if j == i else 0 for j in range(t)] for i, m in enumerate(moduli) if i > c]
    return index


def generates(B: ElementMultiset) -> bool:
    """True iff the support of B generates the whole group."""
    return subgroup_index(B) == 1
