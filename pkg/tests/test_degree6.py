"""Degree-6 family: file handling, validation, restriction audit, route B."""

import os

import pytest

from border4.degree6 import (
    DATA_ENV,
    FAMILY_SIZE,
    RESTRICTED_TERMS,
    Degree6Family,
    FamilyValidationError,
    default_deg6_path,
    eval_family,
    family_registry,
    load_deg6_family,
    membership_routeB,
    parse_deg6_file,
    restricted_family,
    restricted_identity_check,
    restriction_pairs,
    validate_family,
)
from border4.modes import RATIONAL, prime_field
from border4.poly import format_poly
from border4.report import MEMBER, NON_MEMBER
from border4.specialform import f_det
from border4.tensor import (
    sample_generic,
    sample_rank_r,
    sample_special_form,
)

DATA_FILE = default_deg6_path()
needs_data = pytest.mark.skipif(
    DATA_FILE is None or not DATA_FILE.exists(),
    reason="degree-6 family data file not installed",
)


def test_restriction_pairs_order():
    pairs = restriction_pairs()
    assert len(pairs) == 10
    assert pairs[0] == (1, 1) and pairs[-1] == (4, 4)
    assert pairs == sorted(pairs)
    assert all(k <= l for k, l in pairs)


def test_restricted_family_structure():
    polys = restricted_family()
    assert len(polys) == FAMILY_SIZE
    for p, (k, l) in zip(polys, restriction_pairs()):
        assert p.degree() == 6 and p.is_homogeneous()
        assert p.num_terms() == RESTRICTED_TERMS
    # spot check: the (1,1) member is x_3_3_1^2 * f
    reg = family_registry()
    t = sample_special_form(seed=4)
    vals = [None] * 36
    for i in range(3):
        for j in range(3):
            for k in range(4):
                vals[reg.x_pos(i, j, k)] = t.get(i, j, k)
    f = f_det(t)
    for p, (k, l) in zip(polys, restriction_pairs()):
        assert p.eval(vals) == t.get(2, 2, k - 1) * t.get(2, 2, l - 1) * f


def test_validate_family_rejects_malformed_candidates():
    reg = family_registry()
    good = restricted_family()
    with pytest.raises(FamilyValidationError):
        validate_family(good[:9], reg)  # wrong count
    with pytest.raises(FamilyValidationError):
        validate_family(good[:9] + [good[0].set_zero(range(36))], reg)  # zero
    with pytest.raises(FamilyValidationError):
        validate_family(good[:9] + [good[0].mul(good[1])], reg)  # degree 12
    with pytest.raises(FamilyValidationError):
        validate_family(good[:9] + [good[0]], reg)  # dependent span
    validate_family(good, reg)  # the restricted forms themselves are fine


def test_parse_deg6_file_round_trip():
    text = "# synthetic family\n" + "\n".join(
        format_poly(p) for p in restricted_family()
    )
    fam = parse_deg6_file(text, source="synthetic")
    assert len(fam) == FAMILY_SIZE and fam.source == "synthetic"
    for a, b in zip(fam.polys, restricted_family()):
        assert format_poly(a) == format_poly(b)


def test_load_missing_file_raises(tmp_path, monkeypatch):
    monkeypatch.delenv(DATA_ENV, raising=False)
    with pytest.raises(FileNotFoundError):
        load_deg6_family(tmp_path / "nope.txt")


def test_env_var_overrides_packaged_path(tmp_path, monkeypatch):
    alt = tmp_path / "family.txt"
    alt.write_text(
        "\n".join(format_poly(p) for p in restricted_family()), encoding="utf-8"
    )
    monkeypatch.setenv(DATA_ENV, str(alt))
    assert default_deg6_path() == alt
    fam = load_deg6_family()
    assert fam.source == str(alt) and len(fam) == FAMILY_SIZE


def test_restricted_identity_check_on_synthetic_family():
    fam = Degree6Family(
        polys=restricted_family(), source="synthetic", registry=family_registry()
    )
    audit = restricted_identity_check(fam)
    assert audit["ok"] and audit["problems"] == []
    assert len(audit["entries"]) == FAMILY_SIZE
    assert [e["pair"] for e in audit["entries"]] == restriction_pairs()
    assert all(e["scalar"] == 1 for e in audit["entries"])
    assert all(e["terms"] == RESTRICTED_TERMS for e in audit["entries"])


def test_restricted_identity_check_reports_problems():
    polys = restricted_family()
    # duplicate a pair: (1,1) twice, (1,2) missing
    broken = Degree6Family(
        polys=[polys[0]] + [polys[0]] + polys[2:],
        source="broken",
        registry=family_registry(),
    )
    audit = restricted_identity_check(broken)
    assert not audit["ok"]
    assert any("already covered" in p for p in audit["problems"])
    assert any("never covered" in p for p in audit["problems"])


@needs_data
def test_packaged_family_passes_audit():
    fam = load_deg6_family()
    assert len(fam) == FAMILY_SIZE
    audit = restricted_identity_check(fam)
    assert audit["ok"], audit["problems"]
    assert {e["pair"] for e in audit["entries"]} == set(restriction_pairs())


@needs_data
def test_family_vanishes_on_members():
    fam = load_deg6_family()
    for seed in range(5):
        t = sample_rank_r((3, 3, 4), 4, seed=seed)
        assert all(v == 0 for v in eval_family(fam, t))


@needs_data
def test_family_detects_generic_tensors():
    fam = load_deg6_family()
    hits = 0
    for seed in range(5):
        vals = eval_family(fam, sample_generic((3, 3, 4), seed=seed))
        hits += any(v != 0 for v in vals)
    assert hits == 5


@needs_data
def test_eval_family_prime_field_consistency():
    fam = load_deg6_family()
    p = (1 << 31) - 1
    md = prime_field(p)
    t = sample_generic((3, 3, 4), seed=9)
    exact = eval_family(fam, t)
    modular = eval_family(fam, t.cast(md))
    for a, b in zip(exact, modular):
        assert md.coerce(a) == b
    with pytest.raises(ValueError):
        eval_family(fam, sample_generic((4, 4, 4), seed=9))


@needs_data
def test_route_B_verdicts():
    fam = load_deg6_family()
    member = membership_routeB(sample_rank_r((3, 3, 4), 4, seed=14), fam)
    assert member.verdict == MEMBER and member.route == "B"
    assert [s.name for s in member.stages] == ["sym9", "deg6"]

    reject = membership_routeB(sample_generic((3, 3, 4), seed=14), fam)
    assert reject.verdict == NON_MEMBER
    assert not reject.stages[0].passed  # generic fails already at degree 9

    # special-form tensor passing sym9 but caught by the degree-6 stage
    special = sample_special_form(seed=3)
    assert f_det(special) != 0
    rep = membership_routeB(special, fam)
    if rep.stages[0].passed:
        assert rep.verdict == NON_MEMBER
        assert rep.stages[1].name == "deg6" and not rep.stages[1].passed
        w = rep.stages[1].witness
        assert w["value"] != 0 and w["nonzero_count"] >= 1
