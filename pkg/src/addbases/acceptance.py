"""The acceptance suite: fourteen exact, seeded checks at desk scale.

Each criterion is a function ``(seed) -> (passed, details)``.  Seeds are
derived from one base seed plus the criterion number, so any single
criterion can be rerun in isolation with identical instances.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from .energy import (
    additive_energy,
    best_char0_lower_bound,
    char0_lower_bound,
    char3_extremal_pair,
    character_sum_lower_bound,
    charp_lower_bound,
    energy_sumset_lower_bound,
    sigma_p,
)
from .errors import max_order
from .groups import ElementMultiset, ElementSet, elem_from_index, vector_space
from .instances import (
    groups_up_to,
    random_basis,
    random_basis_system,
    random_generating_multiset,
    random_oblique_lattice,
    random_rational_system,
    random_subset,
)
from .lattices import (
    BasisSystem,
    BlockLattice,
    covering_number,
    example_lattice,
    is_p_oblique,
    lattice_from_bases,
    lattice_leq,
)
from .linalg import rank_of_vectors
from .oracles import brute_subset_sums, quadruple_energy, set_cover_covering_number
from .sumsets import (
    char0_sumset_size,
    fp_multiset,
    growth_trace,
    halving_complete,
    is_additive_basis,
    ruzsa_triangle_check,
    subset_sum_indices,
    subset_sum_set,
    basis_threshold,
)
from .synthesis import build_L_blocks, find_A_blocks, solve_block_relation

__all__ = ["Criterion", "CriterionResult", "CRITERIA", "SUITES", "select", "run_criteria"]

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    suites: tuple[str, ...]
    budget_s: float
    check: Callable[[int], tuple[bool, dict]]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    within_budget: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        budget = "" if self.within_budget else " (over time budget)"
        return f"[{mark}] {self.number:2d}. {self.name}  {self.seconds:.2f}s{budget}"


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


def _fail(failures: list, limit: int = 5) -> list:
    return failures[:limit]


# ---------------------------------------------------------------------------
# criteria


def independent_subset_sums(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 1)
    failures, checked = [], 0
    for p in (3, 5):
        for n in range(0, 13):
            B = fp_multiset(p, random_basis(rng, p, n), n) if n else ElementMultiset(vector_space(p, 1))
            if p**n <= min(max_order(), 1 << 22):
                size = len(subset_sum_set(B))
            else:
                size = len(subset_sum_indices(B))
            checked += 1
            if size != 2**n:
                failures.append({"p": p, "n": n, "size": size})
    return not failures, {"instances": checked, "failures": _fail(failures)}


def char0_equality(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 2)
    failures, checked = [], 0
    for n in range(1, 5):
        standard = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        while True:
            M = rng.integers(-3, 4, size=(n, n))
            if rank_of_vectors(M.tolist())[0] == n:
                break
        skewed = [tuple(int(x) for x in row) for row in M]
        for basis in (standard, skewed):
            for k in range(1, 5):
                measured = char0_sumset_size([basis] * k)
                bound = char0_lower_bound([n] * k)
                checked += 1
                if not measured == (k + 1) ** n == bound:
                    failures.append({"n": n, "k": k, "measured": measured, "bound": str(bound)})
    return not failures, {"instances": checked, "failures": _fail(failures)}


def char0_inequality(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 3)
    failures = []
    tight = 0
    for _ in range(100):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(1, 7))
        system = random_rational_system(rng, k, n, max_size=n)
        ranks = [rank_of_vectors(B)[0] for B in system]
        measured = char0_sumset_size(system)
        bound = char0_lower_bound(ranks)
        best = best_char0_lower_bound(ranks)
        tight += measured == bound
        if not (Fraction(measured) >= bound and Fraction(measured) >= best):
            failures.append({"k": k, "n": n, "ranks": ranks, "measured": measured, "bound": str(bound)})
    return not failures, {"instances": 100, "attained": tight, "failures": _fail(failures)}


def char3_extremal(seed: int) -> tuple[bool, dict]:
    sizes = {}
    for l in (1, 2, 3):
        B1, B2 = char3_extremal_pair(l)
        sizes[l] = BasisSystem(3, 2, 2 * l, (tuple(B1), tuple(B2))).sumset_size()
    ok = all(sizes[l] == 8**l for l in sizes)
    return ok, {"sizes": {str(l): s for l, s in sizes.items()}}


def star_energy(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 5)
    failures, checked = [], 0
    for p in (3, 5, 7):
        for n in range(0, 9):
            if p**max(n, 1) > 1 << 20:
                continue
            if n == 0:
                star = ElementSet.zero(vector_space(p, 1))
            else:
                star = subset_sum_set(fp_multiset(p, random_basis(rng, p, n), n))
            T = additive_energy(star)
            checked += 1
            if T != 6**n:
                failures.append({"p": p, "n": n, "energy": T})
    # characteristic zero, counting on explicit vectors
    for n in range(0, 9):
        vecs = rng.integers(-3, 4, size=(n, n))
        while n and rank_of_vectors(vecs.tolist())[0] < n:
            vecs = rng.integers(-3, 4, size=(n, n))
        sel = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(2**n, n)
        star = [tuple(int(x) for x in row) for row in sel @ vecs]
        T = additive_energy(star)
        checked += 1
        if T != 6**n:
            failures.append({"p": 0, "n": n, "energy": T})
    return not failures, {"instances": checked, "failures": _fail(failures)}


def energy_bound(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 6)
    groups = list(groups_up_to(121))
    failures = []
    for _ in range(1000):
        G = groups[int(rng.integers(len(groups)))]
        A, B = random_subset(rng, G), random_subset(rng, G)
        bound = energy_sumset_lower_bound(A, B)
        size = len(A.sumset(B))
        if not size >= bound:
            failures.append({"moduli": list(G.moduli), "size": size, "bound_sq": str(bound.square)})
    return not failures, {"instances": 1000, "groups": len(groups), "failures": _fail(failures)}


def _charp_instances(seed: int) -> list[BasisSystem]:
    rng = _rng(seed, 7)
    out = []
    for _ in range(100):
        p = int(rng.choice([3, 5, 7]))
        r = int(rng.integers(1, 4))
        out.append(random_basis_system(rng, p, 2, r))
    return out


def charp_bound(seed: int) -> tuple[bool, dict]:
    failures = []
    for BS in _charp_instances(seed):
        size = BS.sumset_size()
        if not size >= charp_lower_bound(BS.r, BS.r):
            failures.append({"p": BS.p, "r": BS.r, "size": size})
    return not failures, {"instances": 100, "failures": _fail(failures)}


def sigma_identity(seed: int) -> tuple[bool, dict]:
    errors = {}
    for p in (3, 5, 7, 11, 13, 17):
        with mpmath.workdps(40):
            err = abs(1 + sigma_p(p, 2, dps=40) - mpmath.mpf(3 * p) / 8)
        errors[str(p)] = mpmath.nstr(err, 5)
        if not err < mpmath.mpf("1e-12"):
            return False, {"identity_errors": errors}
    failures = []
    for BS in _charp_instances(seed):
        size = BS.sumset_size()
        bound = character_sum_lower_bound(BS.p, BS.r, 2, dps=40)
        if not size >= bound:
            failures.append({"p": BS.p, "r": BS.r, "size": size, "bound": mpmath.nstr(bound, 15)})
    return not failures, {"identity_errors": errors, "instances": 100, "failures": _fail(failures)}


def example_covering(seed: int) -> tuple[bool, dict]:
    failures, checked = [], 0
    for k in range(2, 6):
        for r in range(1, 4):
            if k * r > 15:
                continue
            for p in (2, 3, 5, 7):
                C = covering_number(example_lattice(k, r, p))
                checked += 1
                if C != min((k + 1) ** r, p**r):
                    failures.append({"k": k, "r": r, "p": p, "C": C})
    return not failures, {"instances": checked, "failures": _fail(failures)}


def bases_round_trip(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 10)
    failures = []
    for _ in range(100):
        p = int(rng.choice([3, 5]))
        k = int(rng.integers(2, 4))
        r = int(rng.integers(1, 4))
        BS = random_basis_system(rng, p, k, r)
        L = lattice_from_bases(BS)
        obl, det = bool(is_p_oblique(L)), L.det
        C, size = covering_number(L), BS.sumset_size()
        if not (obl and det == p**r and C == size):
            failures.append({"p": p, "k": k, "r": r, "oblique": obl, "det": det, "C": C, "size": size})
    return not failures, {"instances": 100, "failures": _fail(failures)}


def synthesis(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 11)
    failures = []
    dims = []
    for _ in range(100):
        p = int(rng.choice([3, 5]))
        k = int(rng.integers(2, p + 1))
        r = int(rng.integers(1, 4))
        L = random_oblique_lattice(rng, p, k, r)
        dims.append(L.dim_w)
        Ls = build_L_blocks(L)
        B = solve_block_relation(Ls, p, rng=rng)
        residual = sum((Bj @ Lj for Bj, Lj in zip(B[1:], Ls[1:])), B[0] @ Ls[0])
        invertible = all(Bj.is_invertible() for Bj in B)
        LB = lattice_from_bases(BasisSystem.from_matrices(B))
        contained = lattice_leq(L, LB, check_cover=False)
        cover_ok = covering_number(LB) <= covering_number(L)
        if not (invertible and residual.is_zero() and contained and cover_ok):
            failures.append(
                {"p": p, "k": k, "r": r, "invertible": invertible, "residual_zero": residual.is_zero(),
                 "contained": contained, "covering_ok": cover_ok}
            )
    nontrivial = sum(d > 0 for d in dims)
    return not failures, {"instances": 100, "nonzero_W": nontrivial, "failures": _fail(failures)}


def additive_bases_desk(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 12)
    failures = []
    n_groups = n_traces = 0
    for G in groups_up_to(48):
        n_groups += 1
        k = basis_threshold(G)
        for _ in range(20):
            Bs = [random_generating_multiset(rng, G) for _ in range(k)]
            ok, _ = is_additive_basis(Bs)
            steps_ok = True
            if G.exponent > 2:
                trace = growth_trace(Bs, require_generating=False)
                n_traces += 1
                steps_ok = all(trace.per_step_ok) and trace.s1_ok
            if not (ok and steps_ok):
                failures.append({"moduli": list(G.moduli), "k": k, "basis": ok, "steps_ok": steps_ok})
    return not failures, {"groups": n_groups, "systems": 20 * n_groups, "traces": n_traces, "failures": _fail(failures)}


def oracle_equivalence(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 13)
    groups = list(groups_up_to(64))
    mismatches: dict[str, list] = {"subset_sums": [], "energy": [], "hnf_cover": [], "set_cover": []}
    for size in range(0, 17):
        for _ in range(3):
            G = groups[int(rng.integers(len(groups)))]
            idx = rng.integers(0, G.order, size=size)
            B = ElementMultiset(G, tuple(elem_from_index(G, int(i)) for i in idx))
            if subset_sum_set(B) != brute_subset_sums(B):
                mismatches["subset_sums"].append({"moduli": list(G.moduli), "size": size})
    for size in range(1, 9):
        for _ in range(5):
            G = groups[int(rng.integers(len(groups)))]
            A = random_subset(rng, G, size=min(size, G.order))
            if additive_energy(A) != quadruple_energy(A) or additive_energy(A, "difference") != additive_energy(A):
                mismatches["energy"].append({"moduli": list(G.moduli), "size": len(A)})
    hnf_checked = cover_checked = 0
    for _ in range(60):
        p = int(rng.choice([2, 3, 5]))
        k = int(rng.integers(2, 5))
        r = int(rng.integers(1, 13 // k + 1))
        if k * r > 12:
            continue
        d = int(rng.integers(0, k * r + 1))
        L = BlockLattice(p, k, r, rng.integers(0, p, size=(d, k * r)) if d else [])
        C = covering_number(L)
        hnf_checked += 1
        if covering_number(L.to_int_lattice()) != C:
            mismatches["hnf_cover"].append({"p": p, "k": k, "r": r, "dim_w": L.dim_w})
        if k * r <= 8:
            cover_checked += 1
            if set_cover_covering_number(L) != C:
                mismatches["set_cover"].append({"p": p, "k": k, "r": r, "dim_w": L.dim_w})
    ok = not any(mismatches.values())
    return ok, {"hnf_checked": hnf_checked, "set_cover_checked": cover_checked,
                "mismatches": {k: _fail(v) for k, v in mismatches.items()}}


def ruzsa_and_halving(seed: int) -> tuple[bool, dict]:
    rng = _rng(seed, 14)
    groups = list(groups_up_to(32))
    failures = []
    halving_hits = 0
    for _ in range(1000):
        G = groups[int(rng.integers(len(groups)))]
        n = int(rng.integers(1, 4))
        sets = [random_subset(rng, G) for _ in range(n + 1)]
        if not ruzsa_triangle_check(sets):
            failures.append({"moduli": list(G.moduli), "sizes": [len(s) for s in sets]})
        S = random_subset(rng, G)
        t = int(rng.integers(max(1, G.order - len(S) + 1), G.order + 1))
        T = random_subset(rng, G, size=t)
        if halving_complete(S, T):
            halving_hits += 1
        else:
            failures.append({"moduli": list(G.moduli), "halving": [len(S), len(T)]})
    return not failures, {"instances": 1000, "halving_checked": halving_hits, "failures": _fail(failures)}


CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, "independent vectors have 2^n subset sums", ("char0",), 1, independent_subset_sums),
    Criterion(2, "equal rational bases attain (k+1)^n", ("char0",), 5, char0_equality),
    Criterion(3, "rational systems meet the product bound", ("char0",), 30, char0_inequality),
    Criterion(4, "characteristic-3 pair has sumset size 8^l", ("charp",), 5, char3_extremal),
    Criterion(5, "energy of B* is 6^n for independent B", ("charp",), 5, star_energy),
    Criterion(6, "energy bound never exceeds |A+B|", ("charp",), 30, energy_bound),
    Criterion(7, "random basis pairs meet (8/3)^r", ("charp",), 30, charp_bound),
    Criterion(8, "1 + sigma_p(2) = 3p/8 and character bound holds", ("charp",), 1, sigma_identity),
    Criterion(9, "example lattice covering number", ("lattice",), 60, example_covering),
    Criterion(10, "bases to lattice round trip", ("lattice",), 60, bases_round_trip),
    Criterion(11, "bases synthesized from oblique lattices", ("synthesis",), 60, synthesis),
    Criterion(12, "threshold-many generating sets form a basis", ("growth",), 120, additive_bases_desk),
    Criterion(13, "fast paths agree with brute-force oracles", ("oracles",), 60, oracle_equivalence),
    Criterion(14, "Ruzsa triangle inequality and halving", ("growth",), 30, ruzsa_and_halving),
)

SUITES = ("all", "growth", "char0", "charp", "lattice", "synthesis", "oracles")


def select(suite: str = "all", only: list[int] | None = None) -> list[Criterion]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    chosen = [c for c in CRITERIA if suite == "all" or suite in c.suites]
    if only:
        chosen = [c for c in chosen if c.number in set(only)]
    return chosen


def run_criteria(criteria: list[Criterion], seed: int = DEFAULT_SEED) -> list[CriterionResult]:
    results = []
    for c in criteria:
        t0 = time.perf_counter()
        passed, details = c.check(seed)
        dt = time.perf_counter() - t0
        results.append(CriterionResult(c.number, c.name, bool(passed), dt, dt <= c.budget_s, details))
        log.info(results[-1].line())
    return results
