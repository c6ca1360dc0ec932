"""Instance files and JSON reports.

Reports are canonical JSON: sorted keys, two-space indent, no floats for
exact quantities.  Fractions become ``{"num", "den"}``, square roots of
rationals ``{"sqrt_of", "decimal"}`` and mpmath reals ``{"decimal",
"digits"}``.  ``report_digest`` hashes everything except the optional
``timing`` block, so two runs with the same inputs and seed produce the
same bytes unless timing was requested.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import mpmath
import numpy as np

from ._version import __version__
from .energy import SqrtRational
from .errors import InstanceError
from .groups import ElementMultiset, GroupElement, GroupSpec, group_make
from .lattices import BasisSystem, BlockLattice, IntLattice
from .linalg import FpMatrix, QMatrix, is_prime

__all__ = [
    "SCHEMA_VERSION",
    "REAL_DIGITS",
    "VectorSystem",
    "encode",
    "canonical_json",
    "digest",
    "load_schema",
    "validate_instance",
    "validate_report",
    "read_instance",
    "parse_group_sets",
    "parse_vector_system",
    "parse_basis_system",
    "parse_lattice",
    "basis_system_instance",
    "block_lattice_instance",
    "build_report",
]

SCHEMA_VERSION = 1
REAL_DIGITS = 30


def encode(obj: Any) -> Any:
    """Convert results into plain JSON values (see module docstring)."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, SqrtRational):
        return {"sqrt_of": encode(obj.square), "decimal": mpmath.nstr(obj.to_mpf(REAL_DIGITS + 5), REAL_DIGITS)}
    if isinstance(obj, mpmath.mpf):
        return {"decimal": mpmath.nstr(obj, REAL_DIGITS), "digits": REAL_DIGITS}
    if isinstance(obj, float):
        raise TypeError("floats are not allowed in reports; use Fraction or mpmath")
    if isinstance(obj, GroupElement):
        return list(obj.residues)
    if isinstance(obj, (FpMatrix, QMatrix)):
        return encode(obj.tolist())
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def canonical_json(obj: Any, indent: int | None = 2) -> str:
    if indent is None:
        return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return json.dumps(obj, sort_keys=True, indent=indent, ensure_ascii=True) + "\n"


def digest(obj: Any) -> str:
    return hashlib.sha256(canonical_json(encode(obj), indent=None).encode()).hexdigest()


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("addbases").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _validate(data: Any, name: str) -> None:
    schema = load_schema(name)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(x) for x in e.absolute_path) or "<root>"
        raise InstanceError(f"{name} schema violation at {where}: {e.message}")


def validate_instance(data: Any) -> None:
    _validate(data, "instance")


def validate_report(report: Any) -> None:
    _validate(report, "report")


def read_instance(path: str | Path) -> dict:
    """Load and schema-validate an instance file."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InstanceError(f"no such instance file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    validate_instance(data)
    return data


def _expect(inst: dict, kinds: tuple[str, ...]) -> None:
    if inst.get("kind") not in kinds:
        raise InstanceError(f"expected an instance of kind {' or '.join(kinds)}, got {inst.get('kind')!r}")


# ---------------------------------------------------------------------------
# parsers


def parse_group_sets(inst: dict) -> tuple[GroupSpec, list[ElementMultiset]]:
    _expect(inst, ("group_sets",))
    try:
        G = group_make(inst["moduli"])
        sets = [ElementMultiset.of(G, items) for items in inst["sets"]]
    except (ValueError, TypeError) as exc:
        raise InstanceError(f"bad group_sets instance: {exc}") from exc
    return G, sets


@dataclass(frozen=True)
class VectorSystem:
    """k finite sets of vectors in F^r; p = 0 means the rationals."""

    p: int
    r: int
    sets: tuple[tuple[tuple, ...], ...]

    @property
    def k(self) -> int:
        return len(self.sets)


def _rational(x) -> Fraction:
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceError(f"bad rational entry {x!r}") from exc


def parse_vector_system(inst: dict) -> VectorSystem:
    """A basis_system instance read as arbitrary vector sets (no basis check)."""
    _expect(inst, ("basis_system",))
    p, k, r = inst["p"], inst["k"], inst["r"]
    if p != 0 and not is_prime(p):
        raise InstanceError(f"p = {p} must be 0 (rationals) or a prime")
    if len(inst["bases"]) != k:
        raise InstanceError(f"k = {k} but {len(inst['bases'])} sets given")
    sets = []
    for i, B in enumerate(inst["bases"]):
        vecs = []
        for v in B:
            if len(v) != r:
                raise InstanceError(f"set {i + 1}: vector {v} does not have length r = {r}")
            if p:
                if any(isinstance(x, str) and "/" in x for x in v):
                    raise InstanceError("fractions are only allowed when p = 0")
                vecs.append(tuple(int(x) % p for x in v))
            else:
                vecs.append(tuple(_rational(x) for x in v))
        sets.append(tuple(vecs))
    return VectorSystem(p, r, tuple(sets))


def parse_basis_system(inst: dict) -> BasisSystem:
    vs = parse_vector_system(inst)
    if vs.p == 0:
        raise InstanceError("lattice commands need a prime p")
    try:
        return BasisSystem(vs.p, vs.k, vs.r, vs.sets)
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc


def parse_lattice(inst: dict) -> BlockLattice | IntLattice:
    _expect(inst, ("block_lattice", "int_lattice"))
    try:
        if inst["kind"] == "block_lattice":
            n = inst["k"] * inst["r"]
            for g in inst["generators"]:
                if len(g) != n:
                    raise ValueError(f"generator {g} does not have length k*r = {n}")
            gens = np.array(inst["generators"], dtype=np.int64).reshape(-1, n)
            return BlockLattice(inst["p"], inst["k"], inst["r"], gens)
        return IntLattice(inst["basis"], inst["dim"])
    except (ValueError, ArithmeticError) as exc:
        raise InstanceError(f"bad lattice instance: {exc}") from exc


def basis_system_instance(BS: BasisSystem) -> dict:
    return {
        "kind": "basis_system",
        "p": BS.p,
        "k": BS.k,
        "r": BS.r,
        "bases": [[list(v) for v in B] for B in BS.bases],
    }


def block_lattice_instance(L: BlockLattice) -> dict:
    return {
        "kind": "block_lattice",
        "p": L.p,
        "k": L.k,
        "r": L.r,
        "generators": L.gens.tolist(),
    }


# ---------------------------------------------------------------------------
# reports


def build_report(
    command: str,
    inputs: Any,
    seed: int | None,
    outputs: dict,
    timing: dict | None = None,
) -> dict:
    """Assemble and schema-check a report."""
    body = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "input_digest": digest(inputs),
        "seed": seed,
        "outputs": encode(outputs),
    }
    body["report_digest"] = digest(body)
    if timing is not None:
        body["timing"] = {k: float(v) for k, v in timing.items()}
    validate_report(body)
    return body
