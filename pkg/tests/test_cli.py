import csv
import json
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest

from addbases import cli
from addbases.energy import SqrtRational
from addbases.errors import InstanceError
from addbases.reports import (
    build_report,
    canonical_json,
    digest,
    encode,
    parse_basis_system,
    parse_lattice,
    read_instance,
    validate_instance,
    validate_report,
)

INST = Path(__file__).resolve().parent.parent / "instances"


def run(capsys, *argv):
    status = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    report = json.loads(out) if out.strip() else None
    error = json.loads(err.strip().splitlines()[-1]) if err.strip() and status else None
    return status, report, error


# reports


def test_encode_exact_values():
    assert encode(Fraction(3, 4)) == {"num": 3, "den": 4}
    enc = encode(SqrtRational(Fraction(64, 9)))
    assert enc["sqrt_of"] == {"num": 64, "den": 9}
    assert enc["decimal"].startswith("2.666666666")
    assert encode(mpmath.mpf(1) / 3)["digits"] == 30
    with pytest.raises(TypeError):
        encode(0.5)


def test_canonical_json_sorts_keys():
    assert canonical_json({"b": 1, "a": 2}, indent=None) == '{"a":2,"b":1}'
    assert digest({"b": 1, "a": 2}) == digest({"a": 2, "b": 1})


def test_report_digest_ignores_timing():
    a = build_report("sumset", {"x": 1}, 0, {"v": 1})
    b = build_report("sumset", {"x": 1}, 0, {"v": 1}, timing={"wall_time_s": 0.5})
    assert a["report_digest"] == b["report_digest"]
    assert "timing" not in a and "timing" in b
    validate_report(b)


def test_report_schema_rejects_extra_fields():
    rep = build_report("sumset", {}, None, {})
    rep["extra"] = 1
    with pytest.raises(InstanceError):
        validate_report(rep)


def test_instance_schema():
    validate_instance({"kind": "group_sets", "moduli": [3], "sets": [[1]]})
    for bad in (
        {"kind": "group_sets", "moduli": [1], "sets": [[0]]},
        {"kind": "group_sets", "moduli": [3]},
        {"kind": "nonsense"},
        {"kind": "basis_system", "p": 3, "k": 1, "r": 1},
    ):
        with pytest.raises(InstanceError):
            validate_instance(bad)


def test_read_instance_errors(tmp_path):
    with pytest.raises(InstanceError):
        read_instance(tmp_path / "missing.json")
    f = tmp_path / "broken.json"
    f.write_text("{not json")
    with pytest.raises(InstanceError):
        read_instance(f)
    with pytest.raises(InstanceError):
        read_instance(INST / "corrupt.json")


def test_parsers_reject_bad_content():
    with pytest.raises(InstanceError):
        parse_basis_system({"kind": "basis_system", "p": 3, "k": 2, "r": 2, "bases": [[[1, 0], [0, 1]], [[1, 1], [2, 2]]]})
    with pytest.raises(InstanceError):
        parse_lattice({"kind": "block_lattice", "p": 3, "k": 2, "r": 1, "generators": [[1, 2, 3]]})


# sumset


def test_sumset_z3(capsys):
    status, rep, _ = run(capsys, "sumset", INST / "z3_two_ones.json", "--witness", "2")
    assert status == 0
    out = rep["outputs"]
    assert out["is_basis"] and out["partial_sums"] == [2, 3]
    assert out["witness"]["parts"] == [[[1]], [[1]]]
    assert rep["command"] == "sumset" and rep["schema_version"] == 1


def test_sumset_examples(capsys):
    assert run(capsys, "sumset", INST / "z2cubed_generating.json")[1]["outputs"]["is_basis"]
    assert not run(capsys, "sumset", INST / "z5_single.json")[1]["outputs"]["is_basis"]


def test_sumset_k_cycles_sets(capsys):
    _, rep, _ = run(capsys, "sumset", INST / "z5_single.json", "--k", "4")
    assert rep["outputs"]["partial_sums"] == [2, 3, 4, 5]


# bounds


def bound(rep, name):
    (entry,) = [b for b in rep["outputs"]["bounds"] if b["bound_name"] == name]
    return entry


def test_bounds_char3_pair(capsys):
    status, rep, _ = run(capsys, "bounds", INST / "char3_pair_l1.json", "--which", "charp")
    assert status == 0
    b = bound(rep, "charp_83")
    assert b["bound_value"]["sqrt_of"] == {"num": 4096, "den": 81}
    assert b["measured_value"] == 8 and b["holds"]


def test_bounds_char0_equality(capsys):
    status, rep, _ = run(capsys, "bounds", INST / "rational_equal_k3_n2.json", "--which", "char0")
    assert status == 0
    b = bound(rep, "char0_product")
    assert b["bound_value"] == {"num": 16, "den": 1}
    assert b["measured_value"] == 16


def test_bounds_all_and_inapplicable(capsys):
    status, rep, _ = run(capsys, "bounds", INST / "char3_pair_l1.json")
    assert status == 0
    names = {b["bound_name"] for b in rep["outputs"]["bounds"]}
    assert names == {"charp_83", "energy_cs", "character_sum"}
    assert "char0" in rep["outputs"]["skipped"]
    status, _, err = run(capsys, "bounds", INST / "rational_equal_k3_n2.json", "--which", "charsum")
    assert status == 2 and err["error"]["exit_status"] == 2


# lattice


def test_lattice_example_cover(capsys):
    status, rep, _ = run(capsys, "lattice", "--example", 3, 1, 5, "--cover")
    assert status == 0 and rep["outputs"]["covering_number"] == 4


def test_lattice_to_bases(capsys):
    status, rep, _ = run(capsys, "lattice", INST / "example_lattice_2_1_3.json", "--to-bases")
    assert status == 0
    assert all(v is not False for v in rep["outputs"]["synthesis"]["checks"].values())


def test_lattice_from_bases(capsys):
    status, rep, _ = run(capsys, "lattice", INST / "char3_pair_l1.json", "--from-bases", "--cover")
    assert status == 0 and rep["outputs"]["covering_number"] == 8


def test_lattice_not_oblique(capsys):
    status, _, err = run(capsys, "lattice", INST / "not_oblique.json", "--to-bases")
    assert status == 2
    assert err["error"]["witness"] is not None and err["error"]["block"] >= 1


def test_int_lattice_cover(capsys):
    status, rep, _ = run(capsys, "lattice", INST / "int_lattice_2x.json", "--cover")
    assert status == 0 and rep["outputs"]["covering_number"] >= 1


def test_corrupt_instance_exit_status(capsys):
    status, _, err = run(capsys, "sumset", INST / "corrupt.json")
    assert status == 2 and err["error"]["code"] == "validation"


# search


def test_search_min_cover_exhaustive(capsys):
    status, rep, _ = run(capsys, "search", "--k", 2, "--r", 1, "--p", 2, "--mode", "min_cover", "--exhaustive")
    assert status == 0 and rep["outputs"]["minimum"] == 2


def test_search_min_sumset_finds_eight(capsys):
    status, rep, _ = run(capsys, "search", "--k", 2, "--r", 2, "--p", 3, "--mode", "min_sumset", "--exhaustive")
    assert status == 0 and rep["outputs"]["minimum"] <= 8


def test_search_is_deterministic(capsys, tmp_path):
    args = ("search", "--k", 3, "--r", 2, "--p", 5, "--budget", 10, "--seed", 7)
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    assert a == b
    path = tmp_path / "rows.csv"
    run(capsys, *args, "--csv", path)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 10 and {"measured", "bound", "holds"} <= set(rows[0])


def test_search_cap(capsys):
    status, _, err = run(capsys, "search", "--k", 4, "--r", 4, "--p", 7, "--exhaustive")
    assert status == 3


# misc


def test_output_file_and_timing(capsys, tmp_path):
    path = tmp_path / "rep.json"
    status, _, _ = run(capsys, "sumset", INST / "z3_two_ones.json", "--out", path, "--timing")
    rep = json.loads(path.read_text())
    assert status == 0 and "wall_time_s" in rep["timing"]
    plain = run(capsys, "sumset", INST / "z3_two_ones.json")[1]
    assert plain["report_digest"] == rep["report_digest"]


def test_verify_suite_filter(capsys):
    status, rep, _ = run(capsys, "verify", "--suite", "lattice")
    assert status == 0
    assert [c["number"] for c in rep["outputs"]["criteria"]] == [9, 10]
