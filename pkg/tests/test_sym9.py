"""Degree-9 symmetrization system and the trace conditions."""

import random
from fractions import Fraction
from itertools import combinations

import pytest

from border4.matrix import ExactMatrix
from border4.modes import RATIONAL, prime_field
from border4.report import MEMBER, NON_MEMBER
from border4.sym9 import (
    MINOR_COUNT,
    build_sym_matrices,
    build_sym_symbolic,
    extract_LR,
    membership_routeA,
    minor_row_sets,
    sym9_test,
    sym_rows_from_slices,
    trace16_check,
)
from border4.tensor import Tensor3, sample_generic, sample_rank_r


def _vec(m):
    return [m[i][j] for i in range(3) for j in range(3)]


def _dot(row, vec):
    return sum(a * b for a, b in zip(row, vec))


def test_rows_encode_commutator_entries():
    # Oracle: row (k, (a,b)) of CL applied to vec(L) must equal the (a,b)
    # entry of L.X_k - (L.X_k)^T computed directly; same for CR with R.
    rng = random.Random(5)
    slices = [
        [[Fraction(rng.randint(-9, 9)) for _ in range(3)] for _ in range(3)]
        for _ in range(4)
    ]
    l = [[Fraction(rng.randint(-9, 9)) for _ in range(3)] for _ in range(3)]
    r = [[Fraction(rng.randint(-9, 9)) for _ in range(3)] for _ in range(3)]
    rows_l, rows_r = sym_rows_from_slices(slices, RATIONAL)
    upper = ((0, 1), (0, 2), (1, 2))
    idx = 0
    for x in slices:
        lx = [[_dot(l[i], [x[c][j] for c in range(3)]) for j in range(3)]
              for i in range(3)]
        xr = [[_dot(x[i], [r[c][j] for c in range(3)]) for j in range(3)]
              for i in range(3)]
        for a, b in upper:
            assert _dot(rows_l[idx], _vec(l)) == lx[a][b] - lx[b][a]
            assert _dot(rows_r[idx], _vec(r)) == xr[a][b] - xr[b][a]
            idx += 1
    assert idx == 12


def test_system_shapes_and_maps():
    t = sample_rank_r((3, 3, 4), 4, seed=1)
    system = build_sym_matrices(t)
    assert (system.cl.nrows, system.cl.ncols) == (12, 9)
    assert (system.cr.nrows, system.cr.ncols) == (12, 9)
    assert len(system.row_map) == 12 and system.row_map[0] == (1, (1, 2))
    assert system.row_map[-1] == (4, (2, 3))
    assert system.col_map == tuple((i, j) for i in (1, 2, 3) for j in (1, 2, 3))
    with pytest.raises(ValueError):
        build_sym_matrices(sample_generic((4, 4, 4), seed=1))


def test_symbolic_system_agrees_with_numeric():
    reg_system = build_sym_symbolic()
    t = sample_rank_r((3, 3, 4), 4, seed=9)
    num = build_sym_matrices(t)
    registry = reg_system.mode.registry
    values = {}
    for i in range(3):
        for j in range(3):
            for k in range(4):
                values[registry.x_pos(i, j, k)] = t.get(i, j, k)
    for sym_mat, num_mat in ((reg_system.cl, num.cl), (reg_system.cr, num.cr)):
        for a in range(12):
            for b in range(9):
                assert sym_mat[a, b].eval(values) == num_mat[a, b]


def test_minor_row_sets_enumeration():
    sets = minor_row_sets()
    assert len(sets) == MINOR_COUNT == 220
    assert sets == sorted(sets)
    assert sets[0] == tuple(range(9))
    assert all(len(s) == 9 for s in sets)
    assert sets == list(combinations(range(12), 9))


def test_sym9_passes_on_low_rank_members():
    for seed in range(5):
        system = build_sym_matrices(sample_rank_r((3, 3, 4), 4, seed=seed))
        passed, witness = sym9_test(system)
        assert passed and witness is None


def test_sym9_rejects_generic_with_verified_witness():
    t = sample_generic((3, 3, 4), seed=3)
    system = build_sym_matrices(t)
    passed, witness = sym9_test(system)
    assert not passed
    assert witness["rank_cl"] == 9 and witness["rank_cr"] == 9
    assert len(witness["minors"]) == 2
    for entry in witness["minors"]:
        mat = system.cl if entry["side"] == "CL" else system.cr
        sub = [[mat.rows[r][c] for c in entry["cols"]] for r in entry["rows"]]
        val = ExactMatrix(RATIONAL, sub, copy=False).det()
        assert val == entry["value"] != 0


def test_extract_LR_kernel_directions():
    for seed in (0, 2, 4):
        t = sample_rank_r((3, 3, 4), 4, seed=seed)
        system = build_sym_matrices(t)
        l, r, defined = extract_LR(system)
        if not defined:
            continue
        # the reshaped kernel vectors really annihilate the system
        vl = [l[i, j] for i in range(3) for j in range(3)]
        vr = [r[i, j] for i in range(3) for j in range(3)]
        for row in system.cl.rows:
            assert _dot(row, vl) == 0
        for row in system.cr.rows:
            assert _dot(row, vr) == 0
        assert trace16_check(l, r)


def test_extract_LR_requires_sym9_first():
    system = build_sym_matrices(sample_generic((3, 3, 4), seed=8))
    with pytest.raises(ValueError):
        extract_LR(system)


def test_extract_LR_undefined_below_rank_8():
    zero = Tensor3.zeros((3, 3, 4), RATIONAL)
    l, r, defined = extract_LR(build_sym_matrices(zero))
    assert (l, r, defined) == (None, None, False)


def test_trace16_accepts_scaled_scalar_pairs():
    md = RATIONAL
    eye = ExactMatrix.identity(md, 3)
    assert trace16_check(eye, eye)
    rng = random.Random(11)
    for _ in range(20):
        a = Fraction(rng.choice([x for x in range(-9, 10) if x]),
                     rng.randint(1, 9))
        b = Fraction(rng.choice([x for x in range(-9, 10) if x]),
                     rng.randint(1, 9))
        assert trace16_check(eye.scale(a), eye.scale(b))


def test_trace16_rejects_non_scalar_products():
    md = RATIONAL
    eye = ExactMatrix.identity(md, 3)
    diag = ExactMatrix.from_rows(md, [[1, 0, 0], [0, 2, 0], [0, 0, 3]])
    assert not trace16_check(eye, diag)
    with pytest.raises(ValueError):
        trace16_check(eye, ExactMatrix.identity(md, 2))


def test_route_A_verdicts():
    member = membership_routeA(sample_rank_r((3, 3, 4), 4, seed=12))
    assert member.verdict == MEMBER and member.route == "A"
    assert [s.name for s in member.stages] == ["sym9", "trace16"]

    reject = membership_routeA(sample_generic((3, 3, 4), seed=12))
    assert reject.verdict == NON_MEMBER
    assert reject.stages[0].name == "sym9" and not reject.stages[0].passed
    assert reject.stages[0].witness is not None

    vac = membership_routeA(Tensor3.zeros((3, 3, 4), RATIONAL))
    assert vac.verdict == MEMBER
    assert vac.stages[1].info.get("vacuous") is True


def test_route_A_prime_field_agrees_with_rational():
    md = prime_field((1 << 31) - 1)
    for seed in (21, 22):
        t = sample_rank_r((3, 3, 4), 4, seed=seed)
        assert membership_routeA(t.cast(md)).verdict == membership_routeA(t).verdict
    g = sample_generic((3, 3, 4), seed=23)
    assert membership_routeA(g.cast(md)).verdict == membership_routeA(g).verdict
