"""``addbases`` command line interface.

Every subcommand writes one JSON report (stdout or ``--out``).  Errors go
to stderr as a JSON object and set the exit status:

    0 success, 2 invalid input, 3 desk-scale cap, 4 a checked claim
    failed, 5 internal invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from fractions import Fraction
from itertools import product
from typing import Sequence

import mpmath
import numpy as np

from . import acceptance
from ._version import __version__
from .energy import (
    SqrtRational,
    additive_energy,
    best_char0_lower_bound,
    char0_lower_bound,
    character_sum_lower_bound,
    charp_lower_bound,
    energy_sumset_lower_bound,
)
from .errors import AddBasesError, DeskScaleError, InstanceError, InvariantBreach, NotObliqueError
from .groups import GroupSpec, generates
from .instances import iter_subspaces, random_basis_system, random_oblique_lattice
from .lattices import (
    BasisSystem,
    BlockLattice,
    IntLattice,
    covering_number,
    example_lattice,
    is_p_oblique,
    lattice_from_bases,
)
from .linalg import FpMatrix, is_prime, rank_of_vectors
from .reports import (
    VectorSystem,
    basis_system_instance,
    block_lattice_instance,
    build_report,
    canonical_json,
    parse_basis_system,
    parse_group_sets,
    parse_lattice,
    parse_vector_system,
    read_instance,
)
from .sumsets import (
    basis_threshold,
    char0_sumset_size,
    fp_multiset,
    growth_trace,
    is_additive_basis,
    subset_sum_set,
    sumset_many,
)
from .synthesis import bases_from_lattice

log = logging.getLogger("addbases")

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_FAILED, EXIT_BREACH = 0, 2, 3, 4, 5

# Largest candidate count an --exhaustive search will enumerate.
EXHAUSTIVE_LIMIT = 200_000


class CheckFailed(Exception):
    """A computed claim did not hold; carries the finished outputs."""

    def __init__(self, outputs: dict):
        super().__init__("verification failed")
        self.outputs = outputs


class Inapplicable(InstanceError):
    code = "inapplicable"


# ---------------------------------------------------------------------------
# sumset


def _group_info(G: GroupSpec) -> dict:
    return {
        "moduli": list(G.moduli),
        "order": G.order,
        "exponent": G.exponent,
        "rank": G.rank,
        "invariant_factors": list(G.invariant_factors),
    }


def cmd_sumset(inst: dict, k: int | None = None, witness: Sequence[int] | None = None) -> dict:
    """Partial sums |S_j|, the basis verdict, the threshold and an optional witness."""
    G, sets = parse_group_sets(inst)
    if k is not None:
        if k < 1:
            raise InstanceError("--k must be >= 1")
        sets = [sets[i % len(sets)] for i in range(k)]
    stars = [subset_sum_set(B) for B in sets]
    partial, S = [], None
    for star in stars:
        S = star if S is None else S.sumset(star)
        partial.append(len(S))
    generating = [generates(B) for B in sets]
    threshold = basis_threshold(G)
    is_basis, parts = is_additive_basis(sets, witness=list(witness) if witness is not None else None)
    out = {
        "group": _group_info(G),
        "k": len(sets),
        "set_sizes": [len(B) for B in sets],
        "star_sizes": [len(s) for s in stars],
        "partial_sums": partial,
        "is_basis": is_basis,
        "all_generating": all(generating),
        "threshold": threshold,
        "meets_threshold": len(sets) >= threshold,
        "growth": None,
    }
    if all(generating) and G.exponent > 2:
        tr = growth_trace(sets, require_generating=False)
        out["growth"] = {"per_step_ok": tr.per_step_ok, "s1_ok": tr.s1_ok, "calculus_ok": tr.calculus_ok}
    if witness is not None:
        target = G.element(list(witness))
        out["witness"] = {
            "target": target,
            "in_sumset": parts is not None,
            "parts": [[list(g.residues) for g in A] for A in parts] if parts is not None else None,
        }
    if out["meets_threshold"] and out["all_generating"] and not is_basis:
        raise InvariantBreach("threshold-many generating sets failed to form a basis")
    if out["growth"] and not (all(out["growth"]["per_step_ok"]) and out["growth"]["s1_ok"]):
        raise InvariantBreach("growth inequality failed for generating sets")
    return out


# ---------------------------------------------------------------------------
# bounds

BOUND_CHOICES = ("char0", "charp", "energy", "charsum")


def _vector_star_sizes(vs: VectorSystem, indices: Sequence[int]) -> int:
    if vs.p == 0:
        return char0_sumset_size([vs.sets[i] for i in indices])
    stars = [subset_sum_set(fp_multiset(vs.p, vs.sets[i], vs.r)) for i in indices]
    return len(sumset_many(stars))


def _bound_entry(name: str, value, measured: int, **extra) -> dict:
    if isinstance(value, mpmath.mpf):
        holds = bool(mpmath.mpf(measured) >= value)
    else:
        holds = bool(measured >= value)
    return {"bound_name": name, "bound_value": value, "measured_value": measured, "holds": holds, **extra}


def _bound_char0(vs: VectorSystem) -> dict:
    if vs.p != 0:
        raise Inapplicable("the product bound is stated over the rationals (p = 0)")
    ranks = [rank_of_vectors(B)[0] for B in vs.sets]
    measured = _vector_star_sizes(vs, range(vs.k))
    e = _bound_entry("char0_product", char0_lower_bound(ranks), measured, ranks=ranks)
    e["best_order_bound"] = best_char0_lower_bound(ranks)
    return e


def _bound_charp(vs: VectorSystem) -> dict:
    if vs.p == 2:
        raise Inapplicable("the (8/3) bound needs characteristic 0 or odd p")
    if vs.k < 2:
        raise Inapplicable("the (8/3) bound compares two sets")
    ranks = [rank_of_vectors(B, vs.p or None)[0] for B in vs.sets[:2]]
    measured = _vector_star_sizes(vs, (0, 1))
    return _bound_entry("charp_83", charp_lower_bound(*ranks), measured, ranks=ranks, sets_used=[1, 2])


def _stars_for_energy(inst: dict):
    if inst["kind"] == "group_sets":
        _, sets = parse_group_sets(inst)
        return [subset_sum_set(B) for B in sets]
    vs = parse_vector_system(inst)
    if vs.p == 0:
        raise Inapplicable("the energy bound is evaluated in finite groups (p > 0)")
    return [subset_sum_set(fp_multiset(vs.p, B, vs.r)) for B in vs.sets]


def _bound_energy(inst: dict) -> dict:
    stars = _stars_for_energy(inst)
    A = stars[0]
    B = stars[1] if len(stars) > 1 else stars[0]
    measured = len(A.sumset(B))
    return _bound_entry(
        "energy_cs",
        energy_sumset_lower_bound(A, B),
        measured,
        energies=[additive_energy(A), additive_energy(B)],
        sets_used=[1, 2] if len(stars) > 1 else [1, 1],
    )


def _bound_charsum(vs: VectorSystem) -> dict:
    if vs.p == 0 or vs.p == 2:
        raise Inapplicable("the character-sum bound needs an odd prime p")
    for i, B in enumerate(vs.sets):
        if len(B) != vs.r or rank_of_vectors(B, vs.p)[0] != vs.r:
            raise Inapplicable(f"the character-sum bound needs bases; set {i + 1} is not one")
    measured = _vector_star_sizes(vs, range(vs.k))
    return _bound_entry("character_sum", character_sum_lower_bound(vs.p, vs.r, vs.k), measured)


def cmd_bounds(inst: dict, which: str = "all") -> dict:
    """Evaluate the requested lower bounds against the measured sumset size."""
    if which not in (*BOUND_CHOICES, "all"):
        raise InstanceError(f"unknown bound {which!r}")
    names = BOUND_CHOICES if which == "all" else (which,)
    entries, skipped = [], {}
    for name in names:
        try:
            if name == "energy":
                entries.append(_bound_energy(inst))
                continue
            if inst["kind"] != "basis_system":
                raise Inapplicable(f"the {name} bound needs a basis_system instance")
            vs = parse_vector_system(inst)
            entries.append({"char0": _bound_char0, "charp": _bound_charp, "charsum": _bound_charsum}[name](vs))
        except Inapplicable as exc:
            if which != "all":
                raise
            skipped[name] = str(exc)
    out = {"bounds": entries, "skipped": skipped, "all_hold": all(e["holds"] for e in entries)}
    if not out["all_hold"]:
        raise CheckFailed(out)
    return out


# ---------------------------------------------------------------------------
# lattice


def _lattice_info(L: BlockLattice | IntLattice) -> dict:
    if isinstance(L, BlockLattice):
        return {**block_lattice_instance(L), "dim_w": L.dim_w, "det": L.det}
    return {"kind": "int_lattice", "dim": L.dim, "hnf": L.hnf, "det": L.det}


def _oblique_info(L, p=None, k=None, r=None) -> dict:
    v = is_p_oblique(L, p, k, r)
    return {"oblique": v.oblique, "witness": v.witness, "block": None if v.block is None else v.block + 1}


def _as_block(L, inst: dict | None) -> BlockLattice:
    if isinstance(L, BlockLattice):
        return L
    params = [inst.get(x) if inst else None for x in ("p", "k", "r")]
    if None in params:
        raise InstanceError("an int_lattice needs p, k and r for this operation")
    return L.to_block(*params)


def cmd_lattice(
    inst: dict | None = None,
    example: Sequence[int] | None = None,
    cover: bool = False,
    oblique: bool = False,
    from_bases: bool = False,
    to_bases: bool = False,
    seed: int = 0,
    threads: int = 1,
) -> dict:
    """Covering numbers, obliqueness, and conversions between bases and lattices."""
    if not (cover or oblique or from_bases or to_bases):
        cover = oblique = True
    out: dict = {}
    if from_bases:
        if inst is None:
            raise InstanceError("--from-bases needs a basis_system instance")
        BS = parse_basis_system(inst)
        L = lattice_from_bases(BS)
        out["sumset_size"] = BS.sumset_size()
    elif example is not None:
        k, r, p = example
        if not is_prime(p):
            raise InstanceError(f"p = {p} is not prime")
        L = example_lattice(k, r, p)
        out["example"] = {"k": k, "r": r, "p": p, "predicted_covering": min((k + 1) ** r, p**r)}
    else:
        if inst is None:
            raise InstanceError("a lattice instance or --example is required")
        L = parse_lattice(inst)
    out["lattice"] = _lattice_info(L)
    if oblique:
        if isinstance(L, IntLattice):
            B = _as_block(L, inst)
            out["oblique"] = _oblique_info(B)
        else:
            out["oblique"] = _oblique_info(L)
    if cover:
        out["covering_number"] = covering_number(L, threads=threads)
    if to_bases:
        block = _as_block(L, inst)
        BS, cert = bases_from_lattice(block, seed=seed)
        out["synthesis"] = {
            "bases": basis_system_instance(BS),
            "B_blocks": cert.B_blocks,
            "M_blocks": cert.M_blocks,
            "checks": cert.checks,
            "covering_numbers": cert.covering_numbers,
            "seed": cert.seed,
        }
    checks = []
    if "sumset_size" in out and "covering_number" in out:
        out["covering_equals_sumset"] = out["covering_number"] == out["sumset_size"]
        checks.append(out["covering_equals_sumset"])
    if "example" in out and "covering_number" in out:
        out["example"]["matches"] = out["covering_number"] == out["example"]["predicted_covering"]
        checks.append(out["example"]["matches"])
    if not all(checks):
        raise CheckFailed(out)
    return out


# ---------------------------------------------------------------------------
# search


def _proven_bounds(p: int, k: int, r: int) -> list:
    """Lower bounds valid for every |B_1* + ... + B_k*| with B_i bases of F_p^r."""
    bounds: list = [2**r]
    if p > 2:
        if k >= 2:
            bounds.append(charp_lower_bound(r, r))
        bounds.append(character_sum_lower_bound(p, r, k))
    return bounds


def _meets(value: int, bounds: list) -> bool:
    return all((mpmath.mpf(value) >= b) if isinstance(b, mpmath.mpf) else value >= b for b in bounds)


def _strongest(bounds: list):
    return max(bounds, key=lambda b: b if isinstance(b, mpmath.mpf) else (b.to_mpf(40) if isinstance(b, SqrtRational) else mpmath.mpf(b)))


def _gl_matrices(p: int, r: int):
    for entries in product(range(p), repeat=r * r):
        M = FpMatrix(np.array(entries, dtype=np.int64).reshape(r, r), p)
        if M.is_invertible():
            yield M


def _gaussian_binomial(n: int, d: int, p: int) -> int:
    num = den = 1
    for i in range(d):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def cmd_search(
    k: int,
    r: int,
    p: int,
    budget: int = 100,
    seed: int = 0,
    mode: str = "min_cover",
    exhaustive: bool = False,
    threads: int = 1,
) -> tuple[dict, list[dict]]:
    """Sample (or enumerate) instances and record the smallest objective seen.

    Returns the report outputs and one CSV row per instance.
    """
    if mode not in ("min_cover", "min_sumset"):
        raise InstanceError(f"unknown mode {mode!r}")
    if k < 2 or r < 1 or not is_prime(p):
        raise InstanceError("need k >= 2, r >= 1 and p prime")
    if budget < 1:
        raise InstanceError("--budget must be >= 1")
    rng = np.random.default_rng(seed)
    # a C(L) bound follows from a sumset bound only when synthesis applies (k <= p)
    applicable = mode == "min_sumset" or k <= p
    bounds = _proven_bounds(p, k, r) if applicable else []

    if mode == "min_cover":
        if exhaustive:
            total = _gaussian_binomial(k * r, (k - 1) * r, p)
            if total > EXHAUSTIVE_LIMIT:
                raise DeskScaleError(f"{total} subspaces exceed the exhaustive limit {EXHAUSTIVE_LIMIT}")
            candidates = (
                L for L in (BlockLattice(p, k, r, W) for W in iter_subspaces(k * r, (k - 1) * r, p)) if is_p_oblique(L)
            )
        else:
            candidates = (random_oblique_lattice(rng, p, k, r, dim_w=(k - 1) * r) for _ in range(budget))
        evaluate = lambda L: covering_number(L, threads=threads)  # noqa: E731
        describe = block_lattice_instance
    else:
        if exhaustive:
            n_gl = sum(1 for _ in _gl_matrices(p, r)) if p ** (r * r) <= EXHAUSTIVE_LIMIT else None
            if n_gl is None or n_gl ** (k - 1) > EXHAUSTIVE_LIMIT:
                raise DeskScaleError("basis systems exceed the exhaustive limit")
            # a common change of basis preserves the sumset size, so B_1 = I
            gl = list(_gl_matrices(p, r))
            I = FpMatrix.identity(r, p)
            candidates = (BasisSystem.from_matrices([I, *rest]) for rest in product(gl, repeat=k - 1))
        else:
            candidates = (random_basis_system(rng, p, k, r) for _ in range(budget))
        evaluate = lambda BS: BS.sumset_size()  # noqa: E731
        describe = basis_system_instance

    best_value, best_instance, n = None, None, 0
    rows = []
    all_hold = True
    bound_value = _strongest(bounds) if bounds else None
    for cand in candidates:
        value = evaluate(cand)
        holds = _meets(value, bounds) if bounds else None
        all_hold = all_hold and holds is not False
        rows.append(
            {
                "index": n,
                "mode": mode,
                "k": k,
                "r": r,
                "p": p,
                "measured": value,
                "bound": "" if bound_value is None else _decimal(bound_value),
                "holds": "" if holds is None else str(holds).lower(),
            }
        )
        if best_value is None or value < best_value:
            best_value, best_instance = value, describe(cand)
        n += 1
    out = {
        "mode": mode,
        "params": {"k": k, "r": r, "p": p, "budget": budget, "exhaustive": exhaustive},
        "instances": n,
        "minimum": best_value,
        "argmin": best_instance,
        "reference_p_to_r": p**r,
        "strongest_bound": bound_value,
        "bounds_hold_on_all": all_hold if bounds else None,
    }
    if not all_hold:
        raise InvariantBreach(f"a proven lower bound failed during search: {out}")
    return out, rows


def _decimal(v) -> str:
    if isinstance(v, SqrtRational):
        v = v.to_mpf(40)
    if isinstance(v, (int, Fraction)):
        return str(v)
    return mpmath.nstr(v, 15)


# ---------------------------------------------------------------------------
# verify


def cmd_verify(suite: str = "all", only: Sequence[int] | None = None, seed: int = acceptance.DEFAULT_SEED):
    try:
        chosen = acceptance.select(suite, list(only) if only else None)
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc
    results = acceptance.run_criteria(chosen, seed)
    out = {
        "suite": suite,
        "criteria": [{"number": r.number, "name": r.name, "passed": r.passed, "details": r.details} for r in results],
        "passed": all(r.passed for r in results),
    }
    return out, results


# ---------------------------------------------------------------------------
# argument handling


def _parse_witness(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("witness must be comma-separated residues, e.g. 1,2") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0; verify has its own default)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="data-parallel width")
    common.add_argument("--timing", action="store_true", help="add wall time to the report")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    ap = argparse.ArgumentParser(prog="addbases", description="Sumsets, additive bases and lattice coverings.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sumset", parents=[common], help="subset-sum sets and the additive-basis verdict")
    s.add_argument("instance")
    s.add_argument("--k", type=int, help="use K sets, cycling through the file's sets")
    s.add_argument("--witness", type=_parse_witness, help="target element as comma-separated residues")

    b = sub.add_parser("bounds", parents=[common], help="lower bounds versus measured sumset sizes")
    b.add_argument("instance")
    b.add_argument("--which", choices=(*BOUND_CHOICES, "all"), default="all")

    lt = sub.add_parser("lattice", parents=[common], help="covering numbers, obliqueness, synthesis")
    lt.add_argument("instance", nargs="?")
    lt.add_argument("--example", nargs=3, type=int, metavar=("K", "R", "P"), help="use the column-sum lattice")
    lt.add_argument("--cover", action="store_true")
    lt.add_argument("--oblique", action="store_true")
    lt.add_argument("--from-bases", action="store_true", help="instance is a basis system; build its lattice")
    lt.add_argument("--to-bases", action="store_true", help="synthesize a basis system from the lattice")

    se = sub.add_parser("search", parents=[common], help="empirical minimum of C(L) or the sumset size")
    se.add_argument("--k", type=int, required=True)
    se.add_argument("--r", type=int, required=True)
    se.add_argument("--p", type=int, required=True)
    se.add_argument("--budget", type=int, default=100)
    se.add_argument("--mode", choices=("min_cover", "min_sumset"), default="min_cover")
    se.add_argument("--exhaustive", action="store_true", help="enumerate every candidate instead of sampling")
    se.add_argument("--csv", help="write one row per instance to this CSV file")

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--suite", choices=acceptance.SUITES, default="all")
    v.add_argument("--only", type=int, nargs="+", metavar="N", help="criterion numbers to run")
    return ap


def _emit(report: dict, out_path: str | None) -> None:
    text = canonical_json(report)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(exc: BaseException, status: int) -> int:
    payload = {"error": {"code": getattr(exc, "code", type(exc).__name__), "message": str(exc), "exit_status": status}}
    if isinstance(exc, NotObliqueError):
        payload["error"]["witness"] = list(exc.witness) if exc.witness is not None else None
        payload["error"]["block"] = None if exc.block is None else exc.block + 1
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return status


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    t0 = time.perf_counter()
    seed = 0 if args.seed is None else args.seed
    status = EXIT_OK
    try:
        inst = read_instance(args.instance) if getattr(args, "instance", None) else None
        if args.command == "sumset":
            params = {"k": args.k, "witness": args.witness}
            outputs = _run_checked(lambda: cmd_sumset(inst, k=args.k, witness=args.witness))
        elif args.command == "bounds":
            params = {"which": args.which}
            outputs = _run_checked(lambda: cmd_bounds(inst, which=args.which))
        elif args.command == "lattice":
            params = {
                "example": args.example,
                "cover": args.cover,
                "oblique": args.oblique,
                "from_bases": args.from_bases,
                "to_bases": args.to_bases,
            }
            outputs = _run_checked(
                lambda: cmd_lattice(inst, args.example, args.cover, args.oblique, args.from_bases, args.to_bases, seed, args.threads)
            )
        elif args.command == "search":
            params = {"k": args.k, "r": args.r, "p": args.p, "budget": args.budget, "mode": args.mode, "exhaustive": args.exhaustive}
            outputs, rows = cmd_search(args.k, args.r, args.p, args.budget, seed, args.mode, args.exhaustive, args.threads)
            if args.csv:
                with open(args.csv, "w", newline="") as fh:
                    writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) if rows else ["index"])
                    writer.writeheader()
                    writer.writerows(rows)
        else:
            seed = acceptance.DEFAULT_SEED if args.seed is None else args.seed
            params = {"suite": args.suite, "only": args.only}
            outputs, results = cmd_verify(args.suite, args.only, seed)
            for r in results:
                sys.stderr.write(r.line() + "\n")
            if not outputs["passed"]:
                status = EXIT_FAILED
        if isinstance(outputs, CheckFailed):
            outputs, status = outputs.outputs, EXIT_FAILED
    except DeskScaleError as exc:
        return _error(exc, EXIT_CAP)
    except InvariantBreach as exc:
        return _error(exc, EXIT_BREACH)
    except AddBasesError as exc:
        return _error(exc, EXIT_INVALID)
    except (ValueError, KeyError, OSError) as exc:
        return _error(exc, EXIT_INVALID)
    timing = {"wall_time_s": time.perf_counter() - t0} if args.timing else None
    report = build_report(args.command, {"instance": inst, "params": params}, seed, outputs, timing)
    _emit(report, args.out)
    return status


def _run_checked(fn):
    try:
        return fn()
    except CheckFailed as exc:
        return exc


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
