#!/usr/bin/env python3
"""Regenerate data/degree6_family.txt by interpolation.

The ten degree-6 conditions live in known weight spaces: row content (2,2,2),
column content (2,2,2), slice content (1,1,1,1) + e_k + e_l for one pair
1 <= k <= l <= 4. For each pair this script enumerates every degree-6
monomial with that content, evaluates them at random rank-4 tensors over two
31-bit prime fields, and extracts the one-dimensional kernel of the
evaluation matrix. The two modular kernels are combined by CRT and rational
reconstruction, cleared to coprime integers, and signed so the restriction
to the special stratum equals a positive multiple of x(3,3,k).x(3,3,l).f.

Everything is then re-verified exactly: vanishing at rational rank-4
samples, the 24-term restriction identity, pair coverage, and family
independence over a third prime. Only a fully verified family is written.

Usage: python scripts/derive_degree6_family.py [--out PATH] [--samples-extra N]
"""

import argparse
import random
import sys
import time
from fractions import Fraction
from math import gcd, isqrt, lcm
from pathlib import Path

import numpy as np

from border4.degree6 import (
    parse_deg6_file,
    restricted_identity_check,
    restriction_pairs,
)
from border4.modbatch import addmod, mulmod, submod
from border4.modes import RATIONAL, _is_probable_prime
from border4.poly import MultiPoly, VarRegistry, format_poly
from border4.specialform import f_det_poly
from border4.tensor import sample_rank_r

P1 = 2**31 - 1
P2 = 2**31 - 19
CHECK_PRIME = 2**31 - 61
assert all(_is_probable_prime(p) for p in (P1, P2, CHECK_PRIME))


def weight_monomials(reg, pair):
    """All degree-6 exponent patterns with row and column contents (2,2,2)
    and slice content (1,1,1,1) + e_k + e_l; 0-based pair."""
    k_counts = [1, 1, 1, 1]
    k_counts[pair[0]] += 1
    k_counts[pair[1]] += 1
    ks = [k for k in range(4) for _ in range(k_counts[k])]
    found = set()

    def rec(idx, icnt, jcnt, acc):
        if idx == 6:
            found.add(tuple(sorted(acc)))
            return
        k = ks[idx]
        for i in range(3):
            if not icnt[i]:
                continue
            for j in range(3):
                if not jcnt[j]:
                    continue
                icnt[i] -= 1
                jcnt[j] -= 1
                rec(idx + 1, icnt, jcnt, acc + [(i, j, k)])
                icnt[i] += 1
                jcnt[j] += 1

    rec(0, [2, 2, 2], [2, 2, 2], [])
    monomials = []
    for triples in sorted(found):
        expo = {}
        for i, j, k in triples:
            pos = reg.x_pos(i, j, k)
            expo[pos] = expo.get(pos, 0) + 1
        monomials.append(tuple(sorted(expo.items())))
    return monomials


def rank4_values(n_samples, p, seed):
    """(n_samples, 36) entries of random rank-4 tensors over GF(p), variable
    order matching the registry (k fastest)."""
    rng = np.random.default_rng(seed)
    a = rng.integers(0, p, size=(n_samples, 4, 3), dtype=np.uint64)
    b = rng.integers(0, p, size=(n_samples, 4, 3), dtype=np.uint64)
    c = rng.integers(0, p, size=(n_samples, 4, 4), dtype=np.uint64)
    ab = mulmod(a[:, :, :, None], b[:, :, None, :], p)  # (n, 4, 3, 3)
    abc = mulmod(ab[:, :, :, :, None], c[:, :, None, None, :], p)  # (n,4,3,3,4)
    t = abc.sum(axis=1) % np.uint64(p)  # 4 summands < p each: no overflow
    return t.reshape(n_samples, 36)


def monomial_columns(monomials, values, p):
    cols = []
    for mon in monomials:
        factors = []
        for pos, e in mon:
            factors.extend([pos] * e)
        col = values[:, factors[0]].copy()
        for f in factors[1:]:
            col = mulmod(col, values[:, f], p)
        cols.append(col)
    return np.stack(cols, axis=1)


def kernel_vector(mat, p):
    """The unique kernel direction of an (n+, n) matrix of rank n-1 over
    GF(p); forward elimination plus back substitution. Raises if the
    kernel dimension is not exactly 1."""
    a = mat.astype(np.uint64, copy=True)
    nrows, ncols = a.shape
    pivots = []
    free = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            free.extend(range(c, ncols))
            break
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            free.append(c)
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv], c:] = a[[piv, r], c:]
        inv = np.uint64(pow(int(a[r, c]), p - 2, p))
        a[r, c:] = mulmod(a[r, c:], inv, p)
        if r + 1 < nrows:
            fac = a[r + 1 :, c][:, None]
            a[r + 1 :, c:] = submod(
                a[r + 1 :, c:], mulmod(fac, a[None, r, c:], p), p
            )
        pivots.append(c)
        r += 1
    if len(free) != 1:
        raise RuntimeError(f"kernel dimension {len(free)}, want 1")
    fc = free[0]
    v = np.zeros(ncols, dtype=np.uint64)
    v[fc] = 1
    for row in range(len(pivots) - 1, -1, -1):
        c = pivots[row]
        tail = mulmod(a[row, c + 1 :], v[c + 1 :], p)
        s = int(tail.sum(dtype=object)) % p
        v[c] = (p - s) % p
    return v


def crt_pair(c1, c2):
    inv = pow(P1 % P2, P2 - 2, P2)
    m = P1 * P2
    return (c1 + P1 * (((c2 - c1) * inv) % P2)) % m


def rational_reconstruct(c, m):
    bound = isqrt(m // 2)
    a0, a1 = m, c % m
    x0, x1 = 0, 1
    while a1 > bound:
        q = a0 // a1
        a0, a1 = a1, a0 - q * a1
        x0, x1 = x1, x0 - q * x1
    n, d = a1, x1
    if d < 0:
        n, d = -n, -d
    if d == 0 or d > bound or gcd(n, d) != 1:
        raise RuntimeError(f"rational reconstruction failed for {c} mod {m}")
    return Fraction(n, d)


def derive_pair(reg, pair, extra, log):
    mons = weight_monomials(reg, (pair[0] - 1, pair[1] - 1))
    n = len(mons)
    kernels = []
    for p, seed in ((P1, 41_000 + 10 * pair[0] + pair[1]), (P2, 57_000 + 10 * pair[0] + pair[1])):
        t0 = time.time()
        vals = rank4_values(n + extra, p, seed)
        mat = monomial_columns(mons, vals, p)
        v = kernel_vector(mat, p)
        resid = mulmod(mat, v[None, :], p).sum(axis=1, dtype=object)
        assert all(int(x) % p == 0 for x in resid)
        kernels.append(v)
        log(f"  pair {pair} p={p}: {n} monomials, kernel in {time.time() - t0:.1f}s")
    v1, v2 = kernels
    idx0 = next(i for i in range(n) if int(v1[i]) and int(v2[i]))
    s1 = pow(int(v1[idx0]), P1 - 2, P1)
    s2 = pow(int(v2[idx0]), P2 - 2, P2)
    coeffs = []
    for i in range(n):
        c1 = (int(v1[i]) * s1) % P1
        c2 = (int(v2[i]) * s2) % P2
        coeffs.append(rational_reconstruct(crt_pair(c1, c2), P1 * P2))
    den = 1
    for c in coeffs:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for c in ints:
        g = gcd(g, c)
    ints = [c // g for c in ints]
    terms = {mon: c for mon, c in zip(mons, ints) if c}
    return MultiPoly(reg, RATIONAL, terms)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument(
        "--out",
        default=Path(__file__).resolve().parent.parent / "src" / "border4" / "data" / "degree6_family.txt",
        type=Path,
    )
    ap.add_argument("--samples-extra", type=int, default=30)
    args = ap.parse_args()
    log = lambda *a: print(*a, file=sys.stderr, flush=True)

    reg = VarRegistry.for_tensor(3, 3, 4)
    f = f_det_poly(reg, RATIONAL)
    x33 = {k: ("x", 3, 3, k) for k in range(1, 5)}
    zero_pos = [reg.x_pos(i, j, k) for (i, j) in ((0, 2), (1, 2), (2, 0), (2, 1)) for k in range(4)]

    polys = []
    for pair in restriction_pairs():
        poly = derive_pair(reg, pair, args.samples_extra, log)
        # orient: restriction must be +scalar * x33k * x33l * f
        res = poly.set_zero(zero_pos)
        q = res.div_exact(f)
        mon, coeff = q.leading()
        want = MultiPoly.var(reg, RATIONAL, x33[pair[0]]).mul(
            MultiPoly.var(reg, RATIONAL, x33[pair[1]])
        )
        (wmon,) = want.terms
        assert q.num_terms() == 1 and mon == wmon, f"restriction shape off for {pair}"
        if coeff < 0:
            poly = poly.neg()
        polys.append(poly)
        log(f"  pair {pair}: {poly.num_terms()} terms, restriction scalar {abs(coeff)}")

    log("exact validation: rational rank-4 vanishing")
    for s in range(60):
        t = sample_rank_r((3, 3, 4), 4, coeff_bound=9, seed=90_000 + s)
        vals = [None] * 36
        for i in range(3):
            for j in range(3):
                for k in range(4):
                    vals[reg.x_pos(i, j, k)] = t.get(i, j, k)
        for n, p in enumerate(polys):
            assert p.eval(vals) == 0, (s, n)

    log("third-prime vanishing sweep")
    vals = rank4_values(500, CHECK_PRIME, 77_001)
    for n, p in enumerate(polys):
        coeffs, factors = p.compiled()
        acc = np.zeros(500, dtype=np.uint64)
        for c, idx in zip(coeffs, factors):
            term = np.full(500, int(c) % CHECK_PRIME, dtype=np.uint64)
            for f_ in idx:
                term = mulmod(term, vals[:, f_], CHECK_PRIME)
            acc = addmod(acc, term, CHECK_PRIME)
        assert not acc.any(), n

    header = [
        "ten degree-6 conditions vanishing on border-rank-<=4 tensors in C^3 x C^3 x C^4",
        "variables x_i_j_k: row i, column j, slice k of a 3x3x4 tensor",
        "one polynomial per line; restriction to the special stratum equals",
        "scalar * x_3_3_k * x_3_3_l * f, pairs (k,l) in order "
        + ", ".join(str(p) for p in restriction_pairs()),
        "derived by weight-space interpolation at rank-4 samples over GF(2^31-1)",
        "and GF(2^31-19), CRT + rational reconstruction, re-verified exactly;",
        "regenerate with scripts/derive_degree6_family.py",
    ]
    lines = [f"# {h}" for h in header] + [format_poly(p) for p in polys]
    text = "\n".join(lines) + "\n"

    fam = parse_deg6_file(text, source="derived")
    audit = restricted_identity_check(fam)
    assert audit["ok"], audit["problems"]
    log("restriction audit ok; scalars "
        + ", ".join(str(e["scalar"]) for e in audit["entries"]))

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text, encoding="utf-8")
    log(f"wrote {args.out}")


if __name__ == "__main__":
    main()
