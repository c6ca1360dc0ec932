from decimal import Decimal, getcontext
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from addbases import (
    ElementMultiset,
    ElementSet,
    basis_threshold,
    elem_from_index,
    group_make,
    growth_trace,
    halving_complete,
    is_additive_basis,
    iterated_sumset,
    ruzsa_triangle_check,
    subset_sum_set,
    sumset,
)
from addbases.instances import groups_up_to, random_generating_multiset, random_subset
from addbases.oracles import brute_subset_sums, brute_sumset
from addbases.sumsets import (
    char0_subset_sum_size,
    char0_sumset_size,
    growth_step_holds,
    subset_sum_indices,
)


def decimal_threshold(order: int, exponent: int) -> int:
    getcontext().prec = 50
    x = 2 * exponent * (Decimal(order).ln() / Decimal(2).ln()).ln()
    return int(x) + 1


def test_subset_sums_of_empty_multiset():
    G = group_make([3, 3])
    assert subset_sum_set(ElementMultiset(G, ())) == ElementSet.zero(G)


def test_subset_sums_of_standard_basis():
    G = group_make([3, 3])
    star = subset_sum_set(ElementMultiset.of(G, [(1, 0), (0, 1)]))
    assert star == ElementSet.from_elements(G, [(0, 0), (1, 0), (0, 1), (1, 1)])
    assert len(star) == 4


def test_subset_sums_of_multiset():
    G = group_make([4])
    B = ElementMultiset.of(G, [1, 1, 2])
    assert subset_sum_set(B) == brute_subset_sums(B) == ElementSet.full(G)


def test_subset_sums_match_enumeration(rng):
    for G in groups_up_to(40):
        for _ in range(3):
            idx = rng.integers(0, G.order, size=rng.integers(0, 6))
            B = ElementMultiset.of(G, [elem_from_index(G, int(i)).residues for i in idx])
            ref = brute_subset_sums(B)
            assert subset_sum_set(B) == ref
            assert subset_sum_indices(B).tolist() == ref.indices().tolist()


def test_sparse_subset_sums_beyond_the_cap():
    n = 30
    G = group_make([3] * n)
    B = ElementMultiset.of(G, [tuple(int(i == j) for j in range(n)) for i in range(12)])
    assert len(subset_sum_indices(B)) == 2**12


def test_small_sumset():
    G = group_make([3])
    S = ElementSet.from_elements(G, [0, 1])
    assert sumset(S, S) == ElementSet.full(G)
    assert iterated_sumset(1, S) == S


def test_iterated_sumset_matches_repeated_addition(rng):
    G = group_make([5, 7])
    S = random_subset(rng, G, 3)
    acc = S
    for n in range(2, 7):
        acc = acc.sumset(S)
        assert iterated_sumset(n, S) == acc
    with pytest.raises(ValueError):
        iterated_sumset(0, S)


def test_basis_examples():
    ok, _ = is_additive_basis([ElementMultiset.of(group_make([2, 2, 2]), [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)])])
    assert ok
    ok, _ = is_additive_basis([ElementMultiset.of(group_make([5]), [1])])
    assert not ok


def test_basis_witness_in_z3():
    G = group_make([3])
    B = ElementMultiset.of(G, [1])
    ok, parts = is_additive_basis([B, B], witness=2)
    assert ok
    assert [[g.residues for g in A] for A in parts] == [[(1,)], [(1,)]]


def test_witness_parts_sum_to_target(rng):
    for G in groups_up_to(30):
        Bs = [random_generating_multiset(rng, G) for _ in range(3)]
        reach = brute_sumset([brute_subset_sums(B) for B in Bs])
        for g in range(G.order):
            ok, parts = is_additive_basis(Bs, witness=elem_from_index(G, g))
            assert ok == reach.is_full()
            if g in reach.indices():
                total = G.zero()
                for A, B in zip(parts, Bs):
                    assert all(x in B.items for x in A)
                    for x in A:
                        total = total + x
                assert total.index == g
            else:
                assert parts is None


@pytest.mark.parametrize("moduli", [[3, 3], [2] * 10, [5], [4, 8], [7, 7, 7], [2, 6], [1000003]])
def test_threshold_against_decimal(moduli):
    G = group_make(moduli)
    assert basis_threshold(G) == decimal_threshold(G.order, G.exponent)


def test_threshold_examples():
    assert basis_threshold(group_make([2])) == 1
    assert basis_threshold(group_make([3, 3])) == 7
    assert basis_threshold(group_make([2] * 10)) == 10


def test_growth_trace_in_z3():
    G = group_make([3])
    B = ElementMultiset.of(G, [1])
    tr = growth_trace([B, B])
    assert tr.sizes == [2, 3]
    assert tr.per_step_ok == [True]
    assert tr.s1_ok


def test_growth_trace_rejects_exponent_two():
    G = group_make([2, 2])
    with pytest.raises(ValueError):
        growth_trace([ElementMultiset.of(G, [(1, 0), (0, 1)])])


def test_growth_step_exact_and_interval_paths_agree(rng):
    for _ in range(200):
        order = int(rng.integers(2, 10**6))
        prev = int(rng.integers(1, order + 1))
        cur = int(rng.integers(prev, order + 1))
        m = int(rng.integers(3, 40))
        assert growth_step_holds(prev, cur, order, m) == (cur ** (m - 1) >= prev ** (m - 2) * order)


def test_growth_step_large_exponent():
    # huge powers go through the interval path
    m = 10**6
    assert growth_step_holds(10, 10, 10, m)
    assert not growth_step_holds(10, 9, 10, m)


def test_halving_examples(rng):
    G = group_make([2])
    assert not halving_complete(ElementSet.zero(G), ElementSet.zero(G))
    F = ElementSet.full(group_make([6]))
    assert halving_complete(F, F)
    Z7 = group_make([7])
    for _ in range(100):
        a = int(rng.integers(1, 8))
        S = random_subset(rng, Z7, a)
        T = random_subset(rng, Z7, 8 - a)
        assert halving_complete(S, T)
        assert S.sumset(T).is_full()


def test_ruzsa_examples():
    G = group_make([5])
    A = ElementSet.from_elements(G, [0, 1])
    assert ruzsa_triangle_check([A, A, A])
    assert ruzsa_triangle_check([A, A])
    with pytest.raises(ValueError):
        ruzsa_triangle_check([A])
    with pytest.raises(ValueError):
        ruzsa_triangle_check([A, ElementSet.empty(G)])


SMALL = [G for G in groups_up_to(32)]


@given(st.sampled_from(SMALL), st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_ruzsa_always_holds(G, n, seed):
    r = np.random.default_rng(seed)
    sets = [random_subset(r, G) for _ in range(n + 1)]
    assert ruzsa_triangle_check(sets)


def test_char0_sizes_by_enumeration():
    vecs = [(1, 0), (0, 1), (1, 1)]
    sums = {tuple(sum(v[i] * c for v, c in zip(vecs, cs)) for i in range(2)) for cs in product((0, 1), repeat=3)}
    assert char0_subset_sum_size(vecs) == len(sums)
    assert char0_sumset_size([[(1,)], [(1,)]]) == 3
    fam = [[(1, 0), (0, 1)]] * 3
    assert char0_sumset_size(fam) == 16
