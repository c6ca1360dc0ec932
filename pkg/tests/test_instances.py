import numpy as np

from addbases.groups import generates
from addbases.instances import (
    groups_up_to,
    iter_subspaces,
    random_basis,
    random_generating_multiset,
    random_oblique_lattice,
    random_rational_system,
    rational_ranks,
)
from addbases.lattices import is_p_oblique
from addbases.linalg import FpMatrix
from addbases.oracles import cofactor_det


def gaussian_binomial(n, d, p):
    num = den = 1
    for i in range(d):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def test_groups_up_to_lists_every_factorisation():
    orders = [G.order for G in groups_up_to(12)]
    assert orders.count(8) == 3  # 8, 2x4, 2x2x2
    assert orders.count(12) == 4  # 12, 2x6, 3x4, 2x2x3
    assert max(orders) == 12 and min(orders) == 2


def test_subspace_enumeration_counts():
    for n, d, p in [(3, 1, 2), (4, 2, 2), (3, 2, 3), (4, 0, 5)]:
        subs = [M.tobytes() for M in iter_subspaces(n, d, p)]
        assert len(subs) == len(set(subs)) == gaussian_binomial(n, d, p)


def test_random_generators_are_valid(rng):
    for G in groups_up_to(30):
        assert generates(random_generating_multiset(rng, G))
    for _ in range(20):
        assert cofactor_det(FpMatrix(random_basis(rng, 5, 3), 5)) != 0
        L = random_oblique_lattice(rng, 3, 3, 2)
        assert is_p_oblique(L)


def test_same_seed_same_instances():
    a = random_rational_system(np.random.default_rng(1), 3, 4)
    b = random_rational_system(np.random.default_rng(1), 3, 4)
    assert a == b
    assert all(1 <= r <= 4 for r in rational_ranks(a))
