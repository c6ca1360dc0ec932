"""Additive energy and closed-form lower bounds for |B_1* + ... + B_k*|.

Bounds that involve square roots are returned as :class:`SqrtRational`
(a value sqrt(q) with q rational), so comparing an integer sumset size
against them is an exact integer computation.  The character-sum bound is
transcendental and is evaluated with mpmath.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Sequence, Union

import mpmath
import numpy as np

from .groups import ElementSet, convolution_counts
from .linalg import is_prime, rank_of_vectors

__all__ = [
    "SqrtRational",
    "BoundReport",
    "additive_energy",
    "nu_difference",
    "independent_star_energy",
    "energy_sumset_lower_bound",
    "char0_lower_bound",
    "best_char0_lower_bound",
    "charp_lower_bound",
    "char3_extremal_pair",
    "sigma_p",
    "character_sum_lower_bound",
]

Number = Union[int, Fraction]


@total_ordering
class SqrtRational:
    """The non-negative real sqrt(square), square a non-negative rational."""

    __slots__ = ("square",)

    def __init__(self, square: Number):
        square = Fraction(square)
        if square < 0:
            raise ValueError("square must be non-negative")
        self.square = square

    @classmethod
    def of(cls, x: Number) -> "SqrtRational":
        x = Fraction(x)
        if x < 0:
            raise ValueError("only non-negative values are representable")
        return cls(x * x)

    def _other_square(self, other) -> Fraction:
        if isinstance(other, SqrtRational):
            return other.square
        other = Fraction(other)
        if other < 0:
            return Fraction(-1)
        return other * other

    def __eq__(self, other):
        if isinstance(other, (SqrtRational, int, Fraction)):
            return self.square == self._other_square(other)
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (SqrtRational, int, Fraction)):
            return self.square < self._other_square(other)
        return NotImplemented

    def __hash__(self):
        return hash(("sqrt", self.square))

    def __float__(self):
        return math.sqrt(self.square)

    def to_mpf(self, dps: int = 30):
        with mpmath.workdps(dps):
            return mpmath.sqrt(mpmath.mpf(self.square.numerator) / self.square.denominator)

    def is_rational(self) -> bool:
        return math.isqrt(self.square.numerator) ** 2 == self.square.numerator and (
            math.isqrt(self.square.denominator) ** 2 == self.square.denominator
        )

    def __repr__(self):
        return f"SqrtRational({self.square})"

    def __str__(self):
        return f"sqrt({self.square})"


@dataclass
class BoundReport:
    bound_name: str
    bound_value: object
    measured_value: int | None = None

    @property
    def holds(self) -> bool | None:
        if self.measured_value is None:
            return None
        return bool(self.measured_value >= self.bound_value)


# ---------------------------------------------------------------------------
# energy


def additive_energy(B, method: str = "sum", modulus: int | None = None) -> int:
    """T(B) = #{(b1, b2, b3, b4) in B^4 : b1 + b2 = b3 + b4}.

    ``B`` is an ElementSet, or a collection of distinct vectors (tuples of
    ints or Fractions; reduced mod ``modulus`` when given).  ``method`` picks
    the counting route: sum_z nu_{B+B}(z)^2 or sum_z nu_{B-B}(z)^2.
    """
    if method not in ("sum", "difference"):
        raise ValueError("method must be 'sum' or 'difference'")
    if isinstance(B, ElementSet):
        other = B if method == "sum" else B.negate()
        counts = convolution_counts(B, other)
        return int(np.dot(counts, counts))
    vecs = _distinct_vectors(B, modulus)
    sign = 1 if method == "sum" else -1
    counts = Counter(
        _vadd(x, y, sign, modulus) for x in vecs for y in vecs
    )
    return sum(c * c for c in counts.values())


def _distinct_vectors(B, modulus):
    out = []
    seen = set()
    for v in B:
        t = tuple(v) if not isinstance(v, (int, Fraction)) else (v,)
        if modulus is not None:
            t = tuple(int(x) % modulus for x in t)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _vadd(x, y, sign, modulus):
    if modulus is None:
        return tuple(a + sign * b for a, b in zip(x, y))
    return tuple((a + sign * b) % modulus for a, b in zip(x, y))


def nu_difference(vectors: Sequence[Sequence[int]], eps: Sequence[int], p: int | None = None) -> int:
    """Representations of z = sum eps_j b_j as a difference of two subset sums of B.

    For independent b_1..b_n over a field of characteristic 0 or odd p this
    is 2^(n - sum |eps_j|): coordinates with eps_j = 0 may use b_j on both
    sides or neither.
    """
    n = len(vectors)
    if len(eps) != n:
        raise ValueError("pattern length must equal the number of vectors")
    if any(e not in (-1, 0, 1) for e in eps):
        raise ValueError("pattern entries must be -1, 0 or 1")
    if p is not None and (p == 2 or not is_prime(p)):
        raise ValueError("needs characteristic 0 or an odd prime")
    if n and rank_of_vectors(vectors, p)[0] != n:
        raise ValueError("vectors are linearly dependent")
    return 2 ** (n - sum(abs(e) for e in eps))


def independent_star_energy(n: int) -> int:
    """T(B*) for n independent vectors in odd or zero characteristic: 6^n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return 6**n


# ---------------------------------------------------------------------------
# bounds


def energy_sumset_lower_bound(A: ElementSet, B: ElementSet) -> SqrtRational:
    """|A|^2 |B|^2 / sqrt(T(A) T(B)), a lower bound for |A + B|."""
    if len(A) == 0 or len(B) == 0:
        raise ValueError("sets must be non-empty")
    num = len(A) ** 2 * len(B) ** 2
    den = additive_energy(A) * additive_energy(B)
    return SqrtRational(Fraction(num * num, den))


def char0_lower_bound(ranks: Sequence[int]) -> Fraction:
    """prod_{j=1..k} ((j+1)/j)^{rk(B_j)} for the given order of B_1..B_k."""
    out = Fraction(1)
    for j, rk in enumerate(ranks, start=1):
        if rk < 0:
            raise ValueError("ranks must be non-negative")
        out *= Fraction(j + 1, j) ** rk
    return out


def best_char0_lower_bound(ranks: Sequence[int]) -> Fraction:
    """The bound for the strongest ordering: ranks sorted descending."""
    return char0_lower_bound(sorted(ranks, reverse=True))


def charp_lower_bound(rk1: int, rk2: int) -> SqrtRational:
    """(8/3)^((rk1 + rk2)/2), valid in characteristic 0 or odd."""
    if rk1 < 0 or rk2 < 0:
        raise ValueError("ranks must be non-negative")
    return SqrtRational(Fraction(8, 3) ** (rk1 + rk2))


def char3_extremal_pair(l: int, p: int = 3) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Bases B_1 = {e_i} and B_2 = {e_{2i-1} +- e_{2i}} of F_3^{2l}.

    |B_1* + B_2*| = 8^l for this pair.
    """
    if p != 3:
        raise ValueError("the extremal pair is a characteristic-3 construction")
    if l < 1:
        raise ValueError("l must be >= 1")
    n = 2 * l

    def e(*pairs):
        v = [0] * n
        for i, c in pairs:
            v[i] = c % p
        return tuple(v)

    B1 = [e((i, 1)) for i in range(n)]
    B2 = []
    for i in range(l):
        a, b = 2 * i, 2 * i + 1
        B2.append(e((a, 1), (b, 1)))
        B2.append(e((a, 1), (b, -1)))
    return B1, B2


def sigma_p(p: int, k: int, dps: int = 30):
    """sum_{u=1}^{p-1} cos(pi u / p)^(2k), evaluated with guard digits."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1:
        raise ValueError("k must be >= 1")
    with mpmath.workdps(dps + 20):
        total = mpmath.fsum(mpmath.cos(mpmath.pi * u / p) ** (2 * k) for u in range(1, p))
    with mpmath.workdps(dps):
        return +total


def character_sum_lower_bound(p: int, r: int, k: int, dps: int = 30):
    """p^r / (1 + sigma_p(k))^r for k bases of F_p^r, p an odd prime."""
    if p == 2:
        raise ValueError("the character-sum bound needs an odd prime")
    if r < 1 or k < 1:
        raise ValueError("r and k must be >= 1")
    s = sigma_p(p, k, dps + 10)
    with mpmath.workdps(dps + 10):
        val = mpmath.mpf(p) ** r / (1 + s) ** r
    with mpmath.workdps(dps):
        return +val

