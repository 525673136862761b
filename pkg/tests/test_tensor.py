"""Tensor container, sections, transforms, serialization, samplers."""

import json
from fractions import Fraction

import pytest

from border4.matrix import ExactMatrix
from border4.modes import FLOAT64, P31, RATIONAL, prime_field
from border4.tensor import (
    SPECIAL_ZERO_POSITIONS,
    Tensor3,
    is_special_form,
    read_tensor,
    sample_essentially_234,
    sample_generic,
    sample_rank_r,
    sample_special_form,
    special_form_flags,
    tensor_from_json,
    tensor_to_json,
    write_tensor,
)

GF31 = prime_field(P31)


def _counting_tensor(dims):
    m, n, l = dims
    t = Tensor3.zeros(dims, RATIONAL)
    for i in range(m):
        for j in range(n):
            for k in range(l):
                t = t.with_entry(i, j, k, 100 * i + 10 * j + k)
    return t


def test_storage_layout_and_get():
    t = _counting_tensor((3, 3, 4))
    assert t.get(1, 2, 3) == 123
    assert t.entries[t.pos(0, 0, 0)] == 0
    # slice k varies slowest, row i next, column j fastest
    assert t.entries[:3] == [0, 10, 20]


def test_slices_agree_across_axes():
    t = _counting_tensor((3, 3, 4))
    for axis in (0, 1, 2):
        mats = t.slices(axis)
        assert len(mats) == t.dims[axis]
    # frontal slice k: entry (i, j) is T[i,j,k]
    s2 = t.slice_rows(2, 1)
    assert s2[2][0] == 201
    # axis-0 section i: entry (j, k) is T[i,j,k]
    s0 = t.slice_rows(0, 2)
    assert s0[1][3] == 213
    # axis-1 section j: entry (i, k) is T[i,j,k]
    s1 = t.slice_rows(1, 0)
    assert s1[2][1] == 201


def test_flattening_ranks_of_rank_one():
    t = sample_rank_r((3, 3, 4), 1, seed=4)
    assert t.flattening_ranks() == (1, 1, 1)
    t4 = sample_rank_r((3, 3, 4), 4, seed=4)
    assert all(r <= 3 for r in t4.flattening_ranks()[:2])
    assert t4.flattening_ranks()[2] <= 4


def test_permute_axes_round_trip():
    t = _counting_tensor((3, 3, 4))
    p = t.permute_axes((2, 0, 1))
    assert p.dims == (4, 3, 3)
    assert p.get(3, 1, 2) == t.get(1, 2, 3)
    # inverse permutation restores the original
    q = p.permute_axes((1, 2, 0))
    assert q == t


def test_basis_change_identity_and_scale():
    t = sample_generic((3, 3, 4), seed=9)
    eye3 = ExactMatrix.identity(RATIONAL, 3)
    eye4 = ExactMatrix.identity(RATIONAL, 4)
    assert t.basis_change(eye3, eye3, eye4) == t
    doubled = t.basis_change(eye3.scale(2), eye3, eye4)
    assert doubled.get(1, 1, 1) == 2 * t.get(1, 1, 1)


def test_basis_change_multiplicativity():
    import random

    rng = random.Random(13)

    def gl(n):
        while True:
            m = ExactMatrix.from_rows(
                RATIONAL, [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
            )
            if m.det() != 0:
                return m

    t = sample_generic((3, 3, 4), seed=14)
    a1, b1, c1 = gl(3), gl(3), gl(4)
    a2, b2, c2 = gl(3), gl(3), gl(4)
    once = t.basis_change(a1, b1, c1).basis_change(a2, b2, c2)
    combined = t.basis_change(a2.matmul(a1), b2.matmul(b1), c2.matmul(c1))
    assert once == combined


def test_cast_round_trip_and_float():
    t = sample_generic((3, 3, 4), seed=2)
    tm = t.cast(GF31)
    assert tm.mode == GF31
    assert tm.get(0, 0, 0) == t.get(0, 0, 0) % P31
    tf = t.cast(FLOAT64)
    assert isinstance(tf.get(1, 1, 1), float)
    assert t.cast(RATIONAL) is t


def test_json_round_trip_all_modes():
    for t in (
        sample_generic((3, 3, 4), seed=3),
        sample_rank_r((4, 4, 4), 4, seed=3).cast(GF31),
        Tensor3((3, 3, 4), RATIONAL, [Fraction(1, 3)] + [0] * 35),
    ):
        s = tensor_to_json(t)
        assert tensor_from_json(s) == t
    obj = json.loads(tensor_to_json(sample_generic((3, 3, 4), seed=3).cast(GF31)))
    assert obj["mode"] == "gfp" and obj["modulus"] == P31
    assert obj["dims"] == [3, 3, 4]


def test_write_read_tensor(tmp_path):
    t = sample_rank_r((3, 3, 4), 4, seed=8)
    path = tmp_path / "t.json"
    write_tensor(path, t)
    assert read_tensor(path) == t
    # deterministic bytes for fixed input
    path2 = tmp_path / "t2.json"
    write_tensor(path2, t)
    assert path.read_bytes() == path2.read_bytes()


def test_special_form_flags():
    t = sample_special_form(seed=5)
    flags = special_form_flags(t)
    assert flags.special and not flags.x33_zero
    assert is_special_form(t)
    t2 = sample_special_form(seed=5, x33_zero=True)
    assert special_form_flags(t2).x33_zero
    g = sample_generic((3, 3, 4), seed=5)
    assert not special_form_flags(g).special
    assert not is_special_form(sample_generic((4, 4, 4), seed=5))
    assert len(SPECIAL_ZERO_POSITIONS) == 4


def test_sampler_zero_patterns():
    t = sample_special_form(seed=6)
    for (i, j) in SPECIAL_ZERO_POSITIONS:
        assert all(t.get(i, j, k) == 0 for k in range(4))
    e = sample_essentially_234(seed=6)
    for k in range(4):
        assert e.get(0, 2, k) == 0
        assert all(e.get(2, j, k) == 0 for j in range(3))
    f = sample_special_form(seed=6, force_f_zero=True)
    from border4.specialform import f_det

    assert f_det(f) == 0
    assert f_det(sample_special_form(seed=6)) != 0


def test_samplers_deterministic_and_mode_aware():
    assert sample_generic((3, 3, 4), seed=7) == sample_generic((3, 3, 4), seed=7)
    assert sample_generic((3, 3, 4), seed=7) != sample_generic((3, 3, 4), seed=8)
    tm = sample_rank_r((3, 3, 4), 4, seed=7, mode=GF31)
    assert tm.mode == GF31
    assert tm == sample_rank_r((3, 3, 4), 4, seed=7).cast(GF31)


def test_with_entry_is_functional():
    t = Tensor3.zeros((3, 3, 4), RATIONAL)
    t2 = t.with_entry(1, 1, 1, 5)
    assert t.get(1, 1, 1) == 0 and t2.get(1, 1, 1) == 5
