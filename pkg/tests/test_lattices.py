import math
from itertools import combinations, product

import numpy as np
import pytest

from addbases import DeskScaleError
from addbases.energy import char3_extremal_pair
from addbases.instances import iter_subspaces, random_basis_system, random_oblique_lattice
from addbases.lattices import (
    BasisSystem,
    BlockLattice,
    IntLattice,
    covering_number,
    cube_vertices,
    example_lattice,
    hermite_normal_form,
    is_p_oblique,
    lattice_from_bases,
    lattice_leq,
    phi_apply,
)
from addbases.linalg import QMatrix
from addbases.oracles import brute_min_cover, set_cover_covering_number


def standard(r):
    return tuple(tuple(int(i == j) for j in range(r)) for i in range(r))


def in_int_lattice(basis, z):
    """z in the lattice spanned by the rows of basis, via rational solving."""
    x = QMatrix(list(zip(*basis))).solve(z)
    return all(v.denominator == 1 for v in x)


def int_det(rows):
    if not rows:
        return 1
    return sum((-1) ** j * rows[0][j] * int_det([r[:j] + r[j + 1:] for r in rows[1:]]) for j in range(len(rows)))


def minor_gcd(gens, n):
    """The lattice determinant as the gcd of all maximal minors."""
    return math.gcd(*(int_det([list(gens[i]) for i in rows]) for rows in combinations(range(len(gens)), n)))


def brute_int_covering(basis, n):
    reps = []
    for v in product((0, 1), repeat=n):
        if not any(in_int_lattice(basis, [a - b for a, b in zip(v, u)]) for u in reps):
            reps.append(v)
    return len(reps)


def test_cube_vertices():
    V = cube_vertices(3)
    assert V.shape == (8, 3)
    assert {tuple(v) for v in V} == set(product((0, 1), repeat=3))
    assert cube_vertices(0).shape == (1, 0)


def test_cube_cap(monkeypatch):
    monkeypatch.setenv("ADDBASES_MAX_CUBE_DIM", "4")
    with pytest.raises(DeskScaleError):
        covering_number(BlockLattice(2, 5, 1))


def test_block_lattice_basics():
    L = BlockLattice(3, 2, 2, [[1, 0, 2, 0], [2, 0, 1, 0]])
    assert L.dim_w == 1 and L.det == 27
    assert L.contains([1, 0, 2, 0]) and L.contains([3, 0, 0, 0])
    assert not L.contains([1, 0, 0, 0])


def test_oblique_examples():
    assert is_p_oblique(BlockLattice(5, 3, 2))
    for k, r, p in [(2, 1, 3), (3, 2, 5), (4, 3, 2)]:
        assert is_p_oblique(example_lattice(k, r, p))
    chk = is_p_oblique(BlockLattice(3, 2, 2, [[1, 0, 0, 0]]))
    assert not chk
    assert chk.witness == (1, 0, 0, 0)


def naive_oblique(L):
    """No nonzero w in W supported on a single block, by listing W."""
    n = L.dim
    for coeffs in product(range(L.p), repeat=L.dim_w):
        w = (np.array(coeffs, dtype=np.int64) @ L.gens.a) % L.p if L.dim_w else np.zeros(n, dtype=np.int64)
        if not w.any():
            continue
        blocks = [w[i * L.r:(i + 1) * L.r].any() for i in range(L.k)]
        if sum(blocks) == 1:
            return False
    return True


def test_oblique_matches_definition():
    for p, k, r in [(2, 2, 1), (3, 2, 1), (2, 2, 2), (2, 3, 1), (3, 3, 1)]:
        n = k * r
        for d in range(n + 1):
            for W in iter_subspaces(n, d, p):
                L = BlockLattice(p, k, r, W)
                chk = is_p_oblique(L)
                assert bool(chk) == naive_oblique(L)
                if not chk:
                    assert L.contains(chk.witness) and any(chk.witness)


def test_covering_examples():
    assert covering_number(BlockLattice(3, 2, 2, np.eye(4, dtype=int))) == 1
    for p in (2, 3, 5):
        assert covering_number(BlockLattice(p, 2, 2)) == 16
    assert covering_number(example_lattice(3, 1, 5)) == 4
    assert covering_number(example_lattice(2, 1, 3)) == 3
    assert covering_number(example_lattice(2, 2, 7)) == 9


def test_covering_matches_set_cover(rng):
    for _ in range(40):
        p = int(rng.choice([2, 3, 5]))
        k, r = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        d = int(rng.integers(0, k * r + 1))
        L = BlockLattice(p, k, r, rng.integers(0, p, size=(d, k * r)) if d else [])
        assert covering_number(L) == set_cover_covering_number(L)


def test_covering_matches_brute_min_cover():
    for W in iter_subspaces(3, 1, 2):
        L = BlockLattice(2, 3, 1, W)
        assert covering_number(L) == brute_min_cover(L)


def test_threads_give_same_count(monkeypatch):
    import addbases.lattices as lat

    monkeypatch.setattr(lat, "_CHUNK", 64)
    L = example_lattice(4, 3, 5)
    assert covering_number(L, threads=4) == covering_number(L) == 125


def test_hnf_properties(rng):
    for _ in range(30):
        n = int(rng.integers(1, 4))
        gens = rng.integers(-6, 7, size=(n + 2, n)).tolist()
        try:
            H = hermite_normal_form(gens, n)
        except ValueError:
            continue
        for i in range(n):
            assert H[i][i] > 0
            assert all(H[i][j] == 0 for j in range(i + 1, n))
            assert all(0 <= H[i][j] < H[i][i] for j in range(i))
        cols = [[H[i][j] for i in range(n)] for j in range(n)]
        for g in gens:
            assert in_int_lattice(cols, g)
        assert abs(math.prod(H[i][i] for i in range(n))) == minor_gcd(gens, n)


def test_int_lattice_covering_by_membership():
    cases = [[[2, 0], [0, 2]], [[1, 1], [0, 2]], [[2, 1], [0, 3]], [[3, 0, 0], [1, 1, 0], [0, 1, 2]]]
    for basis in cases:
        L = IntLattice(basis)
        assert covering_number(L) == brute_int_covering(basis, len(basis))


def test_int_lattice_rank_deficient():
    with pytest.raises(ValueError):
        IntLattice([[1, 1], [2, 2]])


def test_block_and_int_lattices_agree(rng):
    for _ in range(20):
        L = random_oblique_lattice(rng, 3, 2, 2)
        I = L.to_int_lattice()
        assert I.det == L.det
        assert covering_number(I) == covering_number(L)
        assert I.to_block(3, 2, 2) == L


def test_phi_examples():
    BS = random_basis_system(np.random.default_rng(3), 5, 3, 2)
    assert phi_apply(BS, [0] * 6) == (0, 0)
    for i in range(3):
        for j in range(2):
            x = [0] * 6
            x[i * 2 + j] = 1
            assert phi_apply(BS, x) == BS.bases[i][j]


def test_phi_image_of_cube_is_sumset(rng):
    for _ in range(10):
        BS = random_basis_system(rng, 3, 2, 2)
        image = {phi_apply(BS, v) for v in cube_vertices(4).tolist()}
        assert len(image) == BS.sumset_size() == covering_number(lattice_from_bases(BS))


def test_lattice_from_standard_bases():
    for k, r, p in [(2, 1, 3), (3, 2, 5)]:
        BS = BasisSystem(p, k, r, (standard(r),) * k)
        L = lattice_from_bases(BS)
        assert L == example_lattice(k, r, p)
        assert L.det == p**r


def test_lattice_from_char3_pair():
    _, B2 = char3_extremal_pair(1)
    BS = BasisSystem(3, 2, 2, (standard(2), tuple(B2)))
    assert covering_number(lattice_from_bases(BS)) == 8


def test_basis_system_validation():
    with pytest.raises(ValueError):
        BasisSystem(3, 2, 2, (standard(2), ((1, 1), (2, 2))))
    with pytest.raises(ValueError):
        BasisSystem(4, 2, 1, (((1,),), ((1,),)))


def test_lattice_leq_examples(rng):
    L = random_oblique_lattice(rng, 3, 2, 2)
    assert lattice_leq(L, L)
    assert lattice_leq(BlockLattice(3, 2, 2), L)
    with pytest.raises(ValueError):
        lattice_leq(L, BlockLattice(5, 2, 2))


def test_lattice_leq_superspace(rng):
    for _ in range(20):
        p, k, r = 3, 2, 2
        L = BlockLattice(p, k, r, rng.integers(0, p, size=(1, 4)))
        extra = rng.integers(0, p, size=(2, 4))
        M = BlockLattice(p, k, r, np.vstack([L.gens.a, extra]))
        assert lattice_leq(L, M)
        assert covering_number(M) <= covering_number(L)
