"""Lifted 4x4x4 membership: sampling, nine-stage verdicts, extraction."""

import random

import pytest

from border4.degree6 import default_deg6_path, eval_family, load_deg6_family
from border4.lift444 import (
    DEG6,
    FAMILIES,
    SYM9,
    LiftConfig,
    corner_tensor,
    lift_eval,
    lift_generate_modp,
    membership444,
)
from border4.matrix import ExactMatrix
from border4.modes import (
    FLOAT64,
    P31,
    P61,
    RATIONAL,
    ExactnessError,
    ModeError,
    prime_field,
)
from border4.poly import VarRegistry
from border4.report import MEMBER, NON_MEMBER
from border4.sym9 import build_sym_matrices
from border4.tensor import Tensor3, sample_generic, sample_rank_r

GF31 = prime_field(P31)
GF61 = prime_field(P61)

DATA_FILE = default_deg6_path()
needs_data = pytest.mark.skipif(
    DATA_FILE is None or not DATA_FILE.exists(),
    reason="degree-6 family data file not installed",
)


@pytest.fixture(scope="module")
def fam6():
    if DATA_FILE is None or not DATA_FILE.exists():
        return None
    return load_deg6_family()


def test_config_validation():
    with pytest.raises(ValueError):
        LiftConfig(trials=0)
    with pytest.raises(ExactnessError):
        LiftConfig(field=FLOAT64)
    with pytest.raises(ValueError):
        LiftConfig(families=("deg7",))
    with pytest.raises(ValueError):
        LiftConfig(families=())
    assert LiftConfig().families == FAMILIES


def test_corner_tensor_layout():
    ys = [[[10 * k + 4 * i + j for j in range(4)] for i in range(4)] for k in range(4)]
    t = corner_tensor(ys, RATIONAL)
    assert t.dims == (3, 3, 4)
    for k in range(4):
        for i in range(3):
            for j in range(3):
                assert t.get(i, j, k) == 10 * k + 4 * i + j


def test_lift_eval_argument_checks(fam6):
    cfg = LiftConfig(trials=1, field=GF31)
    t334 = sample_generic((3, 3, 4), seed=0, mode=GF31)
    t444 = sample_generic((4, 4, 4), seed=0, mode=GF31)
    with pytest.raises(ValueError):
        lift_eval(t334, 1, SYM9, None, cfg)
    with pytest.raises(ModeError):
        lift_eval(sample_generic((4, 4, 4), seed=0), 1, SYM9, None, cfg)
    with pytest.raises(ValueError):
        lift_eval(t444, 1, "deg7", None, cfg)
    with pytest.raises(ValueError):
        lift_eval(t444, 1, DEG6, None, cfg)  # family file required


def test_sym9_lift_accepts_members_rejects_generic():
    cfg = LiftConfig(trials=4, field=GF31, families=(SYM9,))
    member = sample_rank_r((4, 4, 4), 4, seed=2, mode=GF31)
    for l in (1, 2, 3):
        ok, witness = lift_eval(member, l, SYM9, None, cfg)
        assert ok and witness is None
    generic = sample_generic((4, 4, 4), seed=2, mode=GF31)
    ok, witness = lift_eval(generic, 1, SYM9, None, cfg)
    assert not ok
    assert witness["rank_cl"] == 9 or witness["rank_cr"] == 9
    # replay: the recorded (P, Q) really produce a rank-9 corner system
    pm = ExactMatrix.from_rows(GF31, witness["P"])
    qm = ExactMatrix.from_rows(GF31, witness["Q"])
    from border4.strassen import l_sections

    ys = [pm.matmul(x).matmul(qm).rows for x in l_sections(generic, 1)]
    system = build_sym_matrices(corner_tensor(ys, GF31))
    assert max(system.cl.rank(), system.cr.rank()) == 9


@needs_data
def test_deg6_lift_batched_witness_replays_exactly(fam6):
    cfg = LiftConfig(trials=4, field=GF31)
    generic = sample_generic((4, 4, 4), seed=5, mode=GF31)
    ok, witness = lift_eval(generic, 2, DEG6, fam6, cfg)
    assert not ok
    pm = ExactMatrix.from_rows(GF31, witness["P"])
    qm = ExactMatrix.from_rows(GF31, witness["Q"])
    from border4.strassen import l_sections

    ys = [pm.matmul(x).matmul(qm).rows for x in l_sections(generic, 2)]
    values = eval_family(fam6, corner_tensor(ys, GF31))
    assert values[witness["index"]] == witness["value"]
    assert not GF31.is_zero(witness["value"])


@needs_data
def test_deg6_lift_rational_path(fam6):
    cfg = LiftConfig(trials=1, field=RATIONAL)
    member = sample_rank_r((4, 4, 4), 4, seed=3)
    ok, witness = lift_eval(member, 3, DEG6, fam6, cfg)
    assert ok and witness is None
    ok, witness = lift_eval(sample_generic((4, 4, 4), seed=3), 3, DEG6, fam6, cfg)
    assert not ok and witness["value"] != 0


@needs_data
def test_membership444_member_all_stages(fam6):
    cfg = LiftConfig(trials=8, field=GF31, seed=1)
    rep = membership444(sample_rank_r((4, 4, 4), 4, seed=11, mode=GF31), fam6, cfg)
    assert rep.verdict == MEMBER and rep.route == "444"
    names = [s.name for s in rep.stages]
    assert names == [
        "deg5_l1", "deg5_l2", "deg5_l3",
        "deg6_lift_l1", "deg6_lift_l2", "deg6_lift_l3",
        "sym9_lift_l1", "sym9_lift_l2", "sym9_lift_l3",
    ]
    assert all(s.passed for s in rep.stages)


@needs_data
def test_membership444_generic_runs_every_stage(fam6):
    cfg = LiftConfig(trials=2, field=GF31, seed=1)
    rep = membership444(sample_generic((4, 4, 4), seed=11, mode=GF31), fam6, cfg)
    assert rep.verdict == NON_MEMBER
    assert len(rep.stages) == 9  # no early exit
    assert all(not s.passed for s in rep.stages)
    assert all(s.witness is not None for s in rep.stages)


def test_membership444_family_subset_skips_deg6():
    cfg = LiftConfig(trials=4, field=GF31, families=(SYM9,))
    rep = membership444(sample_rank_r((4, 4, 4), 4, seed=4, mode=GF31), None, cfg)
    assert rep.verdict == MEMBER
    assert [s.name for s in rep.stages] == [
        "deg5_l1", "deg5_l2", "deg5_l3",
        "sym9_lift_l1", "sym9_lift_l2", "sym9_lift_l3",
    ]


@needs_data
def test_membership444_zero_tensor_and_p61(fam6):
    cfg = LiftConfig(trials=2, field=GF31)
    rep = membership444(Tensor3.zeros((4, 4, 4), GF31), fam6, cfg)
    assert rep.verdict == MEMBER
    cfg61 = LiftConfig(trials=2, field=GF61, seed=0)
    rep61 = membership444(sample_rank_r((4, 4, 4), 4, seed=11, mode=GF61), fam6, cfg61)
    assert rep61.verdict == MEMBER


def test_generate_validation(fam6):
    with pytest.raises(ValueError):
        lift_generate_modp("deg7", 1, P31)
    with pytest.raises(ValueError):
        lift_generate_modp(DEG6, 1, P31)  # needs fam6
    with pytest.raises(ValueError):
        lift_generate_modp(SYM9, 4, P31)
    with pytest.raises(ValueError):
        lift_generate_modp(SYM9, 1, P31, budget=0)


def test_generate_sym9_budget_and_coverage():
    out = lift_generate_modp(SYM9, 1, P31, budget=1, seed=0)
    cov = out.coverage
    assert cov["units_processed"] == 1
    assert cov["exhausted"] and not cov["complete"]
    assert cov["frontier"] == {"pattern": 0, "condition": ("minor", "L", tuple(range(1, 10)))} or (
        cov["frontier"]["pattern"] == 0
    )
    assert cov["units_total"] == 4096 * 440
    assert len(out) == len(out.records)
    conds = {r.condition for r in out}
    assert conds == {("minor", "L", tuple(range(9)))}
    pi, rho = out.records[0].pattern
    assert len(set(pi)) == 3 and len(set(rho)) == 3  # injective patterns first


@needs_data
def test_generate_deg6_one_pattern(fam6):
    out = lift_generate_modp(DEG6, 3, P31, budget=10, seed=0, fam6=fam6)
    cov = out.coverage
    assert cov["units_processed"] == 10 and cov["monomials_processed"] == 10
    assert cov["units_total"] == 4096 * 10
    assert [r.condition for r in out] == [("poly", n) for n in range(10)]
    patterns = {r.pattern for r in out}
    assert len(patterns) == 1
    for r in out:
        assert r.family == DEG6 and r.l == 3
        assert all(e == 2 for _, e in r.pq_monomial)
        assert len(r.pq_monomial) == 6


def _monomial_pq_values(reg, pattern, rng, p):
    """Numeric P, Q supported exactly on the pattern, plus a value vector
    indexed by registry position."""
    pi, rho = pattern
    vals = [0] * len(reg)
    p_rows = [[0] * 4 for _ in range(4)]
    q_rows = [[0] * 4 for _ in range(4)]
    for i in range(3):
        v = rng.randrange(1, p)
        p_rows[i][pi[i]] = v
        vals[reg.p_pos(i, pi[i])] = v
    for j in range(3):
        v = rng.randrange(1, p)
        q_rows[rho[j]][j] = v
        vals[reg.q_pos(rho[j], j)] = v
    return p_rows, q_rows, vals


def _lift_corner(t, l, p_rows, q_rows, md):
    from border4.strassen import l_sections

    pm = ExactMatrix.from_rows(md, p_rows)
    qm = ExactMatrix.from_rows(md, q_rows)
    return corner_tensor([pm.matmul(x).matmul(qm).rows for x in l_sections(t, l)], md)


def _mon_value(mon, vals, p):
    out = 1
    for pos, e in mon:
        out = out * pow(vals[pos], e, p) % p
    return out


@needs_data
@pytest.mark.parametrize("l", [1, 2, 3])
def test_deg6_extraction_identity(fam6, l):
    # Oracle: at P, Q supported on one monomial pattern, evaluating the
    # family on the lifted corner must equal coefficient * pq-monomial.
    p = P31
    md = GF31
    out = lift_generate_modp(DEG6, l, p, budget=10, seed=2, fam6=fam6)
    reg = VarRegistry.for_tensor(4, 4, 4, with_pq=True)
    rng = random.Random(100 + l)
    t = sample_generic((4, 4, 4), seed=50 + l, mode=md)
    vals = [0] * len(reg)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                vals[reg.x_pos(i, j, k)] = t.get(i, j, k)
    pattern = out.records[0].pattern
    p_rows, q_rows, pq_vals = _monomial_pq_values(reg, pattern, rng, p)
    for pos, v in enumerate(pq_vals):
        if v:
            vals[pos] = v
    corner = _lift_corner(t, l, p_rows, q_rows, md)
    family_values = eval_family(fam6, corner)
    for r in out:
        index = r.condition[1]
        want = md.mul(r.poly.eval(vals), _mon_value(r.pq_monomial, vals, p))
        assert family_values[index] == want


def test_sym9_extraction_identity():
    # Same oracle for one degree-9 minor unit: the minor of the lifted
    # corner system equals the sum of coefficient * pq-monomial values.
    p = P31
    md = GF31
    l = 2
    out = lift_generate_modp(SYM9, l, p, budget=1, seed=3)
    assert len(out) > 0
    reg = VarRegistry.for_tensor(4, 4, 4, with_pq=True)
    rng = random.Random(200)
    t = sample_generic((4, 4, 4), seed=60, mode=md)
    vals = [0] * len(reg)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                vals[reg.x_pos(i, j, k)] = t.get(i, j, k)
    pattern = out.records[0].pattern
    p_rows, q_rows, pq_vals = _monomial_pq_values(reg, pattern, rng, p)
    for pos, v in enumerate(pq_vals):
        if v:
            vals[pos] = v
    corner = _lift_corner(t, l, p_rows, q_rows, md)
    system = build_sym_matrices(corner)
    side, rowset = out.records[0].condition[1], out.records[0].condition[2]
    mat = system.cl if side == "L" else system.cr
    sub = [[mat.rows[r][c] for c in range(9)] for r in rowset]
    want = ExactMatrix(md, sub, copy=False).det()
    acc = 0
    for r in out:
        assert r.condition == ("minor", side, rowset)
        acc = md.add(acc, md.mul(r.poly.eval(vals), _mon_value(r.pq_monomial, vals, p)))
    assert acc == want


@needs_data
def test_lift_records_vanish_on_members(fam6):
    out = lift_generate_modp(DEG6, 1, P31, budget=10, seed=1, fam6=fam6)
    reg = VarRegistry.for_tensor(4, 4, 4, with_pq=True)
    for seed in range(3):
        t = sample_rank_r((4, 4, 4), 4, seed=seed, mode=GF31)
        vals = [0] * len(reg)
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    vals[reg.x_pos(i, j, k)] = t.get(i, j, k)
        assert all(GF31.is_zero(r.poly.eval(vals)) for r in out)
    # and not identically zero: a generic tensor lights some of them up
    g = sample_generic((4, 4, 4), seed=9, mode=GF31)
    vals = [0] * len(reg)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                vals[reg.x_pos(i, j, k)] = g.get(i, j, k)
    assert any(not GF31.is_zero(r.poly.eval(vals)) for r in out)
