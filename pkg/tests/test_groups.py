from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from addbases import (
    DeskScaleError,
    ElementMultiset,
    ElementSet,
    GroupMismatchError,
    elem_add,
    elem_from_index,
    elem_index,
    elem_neg,
    elem_scale,
    generates,
    group_make,
    subgroup_closure,
    subgroup_index,
)
from addbases.instances import groups_up_to
from addbases.oracles import brute_sumset

SMALL_GROUPS = list(groups_up_to(100))


def naive_closure(G, items):
    seen = {0}
    frontier = [G.zero()]
    while frontier:
        nxt = []
        for x in frontier:
            for g in items:
                y = x + g
                if y.index not in seen:
                    seen.add(y.index)
                    nxt.append(y)
        frontier = nxt
    return seen


def min_generators(G):
    """Smallest number of elements generating G, by exhaustive search."""
    elems = list(G.elements())
    for size in range(1, G.ndim + 1):
        for combo in combinations(elems, size):
            if len(naive_closure(G, combo)) == G.order:
                return size
    return G.ndim


@pytest.mark.parametrize(
    "moduli, order, exponent, rank",
    [([2, 2, 2], 8, 2, 3), ([3, 3], 9, 3, 2), ([2, 6], 12, 6, 2)],
)
def test_group_make_examples(moduli, order, exponent, rank):
    G = group_make(moduli)
    assert (G.order, G.exponent, G.rank) == (order, exponent, rank)


def test_invariant_factors_of_2_6():
    assert group_make([2, 6]).invariant_factors == (2, 6)
    assert group_make([6, 4]).invariant_factors == (2, 12)


def test_rank_is_minimal_generator_count():
    for G in groups_up_to(24):
        assert G.rank == min_generators(G), G


def test_group_make_rejects_bad_moduli():
    with pytest.raises(ValueError):
        group_make([1, 3])
    with pytest.raises(ValueError):
        group_make([])
    with pytest.raises(OverflowError):
        group_make([2**40, 2**40])


def test_element_arithmetic_examples():
    G = group_make([3, 3])
    assert elem_add(G.element((1, 2)), G.element((2, 2))).residues == (0, 1)
    assert elem_neg(G.element((1, 0))).residues == (2, 0)
    assert elem_scale(4, G.element((1, 1))).residues == (1, 1)


def test_index_examples():
    G = group_make([3, 3])
    assert elem_index(G.zero()) == 0
    assert elem_index(G.element((2, 0))) == 2
    assert elem_from_index(G, 2).residues == (2, 0)


def test_index_round_trip_exhaustive():
    for G in SMALL_GROUPS:
        for i in range(G.order):
            g = elem_from_index(G, i)
            assert elem_index(g) == i
            assert elem_from_index(G, elem_index(g)) == g


def test_index_out_of_range():
    G = group_make([3, 3])
    with pytest.raises(IndexError):
        elem_from_index(G, 9)
    with pytest.raises(IndexError):
        elem_from_index(G, -1)


def test_group_mismatch():
    a = group_make([3]).element(1)
    b = group_make([5]).element(1)
    with pytest.raises(GroupMismatchError):
        elem_add(a, b)


group_and_elements = st.sampled_from(SMALL_GROUPS).flatmap(
    lambda G: st.tuples(st.just(G), *[st.integers(0, G.order - 1)] * 3)
)


@given(group_and_elements)
def test_addition_is_associative_and_commutative(data):
    G, i, j, k = data
    a, b, c = (elem_from_index(G, x) for x in (i, j, k))
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a + elem_neg(a) == G.zero()


def test_exponent_annihilates_everything():
    for G in SMALL_GROUPS:
        for g in G.elements():
            assert elem_scale(G.exponent, g).is_zero()


def test_order_at_most_exponent_to_rank():
    for G in SMALL_GROUPS:
        assert G.order <= G.exponent**G.rank


def test_generates_examples():
    G = group_make([3, 3])
    assert generates(ElementMultiset.of(G, [(1, 0), (0, 1)]))
    B = ElementMultiset.of(G, [(1, 1)])
    assert not generates(B)
    assert len(subgroup_closure(B)) == len(naive_closure(G, B.items)) == 3
    assert not generates(ElementMultiset.of(group_make([4]), [2]))


def test_subgroup_closure_and_index_match_naive_closure(rng):
    for G in groups_up_to(64):
        for _ in range(4):
            items = [elem_from_index(G, int(i)) for i in rng.integers(0, G.order, size=rng.integers(0, 4))]
            ref = naive_closure(G, items)
            assert set(subgroup_closure(items, G).indices().tolist()) == ref
            assert subgroup_index(items, G) * len(ref) == G.order


def test_generates_is_monotone(rng):
    for G in groups_up_to(48):
        items = [elem_from_index(G, int(i)) for i in rng.integers(0, G.order, size=2)]
        B = ElementMultiset(G, tuple(items))
        if generates(B):
            for x in range(G.order):
                assert generates(B + ElementMultiset.of(G, [elem_from_index(G, x)]))


def test_element_set_operations():
    G = group_make([2, 3])
    S = ElementSet.from_elements(G, [(0, 0), (1, 1)])
    assert len(S) == 2 and G.element((1, 1)) in S
    assert S.translate(G.element((1, 0))) == ElementSet.from_elements(G, [(1, 0), (0, 1)])
    assert S.negate() == ElementSet.from_elements(G, [(0, 0), (1, 2)])
    assert (S | ElementSet.zero(G)) == S
    assert (S & ElementSet.zero(G)) == ElementSet.zero(G)
    assert S.issubset(ElementSet.full(G))


def test_sumset_matches_tuple_enumeration(rng):
    for G in groups_up_to(60):
        for sizes in ((1, 3), (5, 7), (G.order // 2 + 1, 2)):
            A = ElementSet.from_indices(G, rng.choice(G.order, size=min(sizes[0], G.order), replace=False))
            B = ElementSet.from_indices(G, rng.choice(G.order, size=min(sizes[1], G.order), replace=False))
            assert A.sumset(B) == brute_sumset([A, B])


def test_large_sumsets_use_the_convolution_path(rng):
    G = group_make([7, 11, 13])
    A = ElementSet.from_indices(G, rng.choice(G.order, size=200, replace=False))
    B = ElementSet.from_indices(G, rng.choice(G.order, size=150, replace=False))
    ref = ElementSet.empty(G)
    for a in A.indices():
        ref = ref | B.translate(elem_from_index(G, int(a)))
    assert A.sumset(B) == ref


def test_desk_scale_cap(monkeypatch):
    monkeypatch.setenv("ADDBASES_MAX_ORDER", "100")
    with pytest.raises(DeskScaleError):
        ElementSet.zero(group_make([11, 11]))
    ElementSet.zero(group_make([10, 10]))


def test_masks_are_read_only():
    S = ElementSet.zero(group_make([5]))
    with pytest.raises(ValueError):
        S.mask[1] = True
