"""Vectorized arithmetic mod p on numpy arrays.

Primes below ~3.03e9 use plain int64-safe products; the Mersenne prime
2^61 - 1 gets a limb decomposition (2^61 = 1 mod p keeps every intermediate
inside uint64). Other large primes fall back to Python-int object arrays:
exact, just slower. Used by the sweep layers; all single-value arithmetic
elsewhere stays in plain Python ints.
"""

import numpy as np

M61 = (1 << 61) - 1
_M31 = (1 << 31) - 1
_M30 = (1 << 30) - 1
_SMALL_MAX = 3_037_000_000  # (p-1)^2 still fits in a signed/unsigned 64-bit


def _as_u64(a):
    return np.asarray(a, dtype=np.uint64)


def mulmod(a, b, p):
    """(a * b) mod p elementwise; inputs already reduced into [0, p)."""
    if p <= _SMALL_MAX:
        return (_as_u64(a) * _as_u64(b)) % np.uint64(p)
    if p == M61:
        return _mulmod61(_as_u64(a), _as_u64(b))
    av = np.asarray(a, dtype=object)
    bv = np.asarray(b, dtype=object)
    return np.frompyfunc(lambda x, y: x * y % p, 2, 1)(av, bv)


def _fold61(x):
    x = (x & np.uint64(M61)) + (x >> np.uint64(61))
    x = (x & np.uint64(M61)) + (x >> np.uint64(61))
    return np.where(x >= np.uint64(M61), x - np.uint64(M61), x)


def _mulmod61(a, b):
    a_hi = a >> np.uint64(31)
    a_lo = a & np.uint64(_M31)
    b_hi = b >> np.uint64(31)
    b_lo = b & np.uint64(_M31)
    hi = a_hi * b_hi                     # < 2^60, weight 2^62 = 2 mod p
    mid = a_hi * b_lo + a_lo * b_hi      # < 2^62, weight 2^31
    mh = mid >> np.uint64(30)            # weight 2^61 = 1 mod p
    ml = mid & np.uint64(_M30)           # weight 2^31
    lo = a_lo * b_lo                     # < 2^62
    total = (hi << np.uint64(1)) + mh + (ml << np.uint64(31)) + _fold61(lo)
    return _fold61(total)


def addmod(a, b, p):
    if p <= _SMALL_MAX or p == M61:
        s = _as_u64(a) + _as_u64(b)
        return np.where(s >= np.uint64(p), s - np.uint64(p), s)
    av = np.asarray(a, dtype=object)
    bv = np.asarray(b, dtype=object)
    return np.frompyfunc(lambda x, y: (x + y) % p, 2, 1)(av, bv)


def submod(a, b, p):
    if p <= _SMALL_MAX or p == M61:
        a = _as_u64(a)
        b = _as_u64(b)
        s = a + (np.uint64(p) - b)
        return np.where(s >= np.uint64(p), s - np.uint64(p), s)
    av = np.asarray(a, dtype=object)
    bv = np.asarray(b, dtype=object)
    return np.frompyfunc(lambda x, y: (x - y) % p, 2, 1)(av, bv)


def matmul_modp(a, b, p):
    """Batched matrix product mod p: (..., n, k) @ (..., k, m)."""
    k = np.asarray(a).shape[-1]
    if p <= _SMALL_MAX and k * (p - 1) ** 2 < (1 << 64):
        return np.matmul(_as_u64(a), _as_u64(b)) % np.uint64(p)
    av = np.asarray(a)
    bv = np.asarray(b)
    acc = mulmod(av[..., :, 0:1], bv[..., 0:1, :], p)
    for c in range(1, k):
        acc = addmod(acc, mulmod(av[..., :, c : c + 1], bv[..., c : c + 1, :], p), p)
    return acc


def rank_modp(mat, p):
    """Rank over GF(p) of a 2-D array of reduced residues."""
    a = np.array(mat, dtype=object if (p > _SMALL_MAX and p != M61) else np.uint64)
    if a.ndim != 2:
        raise ValueError("rank_modp wants a 2-D array")
    nrows, ncols = a.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv], c:] = a[[piv, r], c:]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r, c:] = mulmod(a[r, c:], np.uint64(inv) if p <= _SMALL_MAX or p == M61 else inv, p)
        below = a[r + 1 :, c]
        nzb = np.nonzero(below)[0]
        if nzb.size:
            rows = r + 1 + nzb
            fac = a[rows, c][:, None]
            a[np.ix_(rows, range(c, ncols))] = submod(
                a[np.ix_(rows, range(c, ncols))], mulmod(fac, a[None, r, c:], p), p
            )
        r += 1
    return r


def kernel_modp(mat, p):
    """Basis of the right kernel over GF(p); returns a list of 1-D arrays."""
    a = np.array(mat, dtype=object if (p > _SMALL_MAX and p != M61) else np.uint64)
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv], :] = a[[piv, r], :]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r, :] = mulmod(a[r, :], np.uint64(inv) if p <= _SMALL_MAX or p == M61 else inv, p)
        other = np.nonzero(a[:, c])[0]
        other = other[other != r]
        if other.size:
            fac = a[other, c][:, None]
            a[other, :] = submod(a[other, :], mulmod(fac, a[None, r, :], p), p)
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = np.zeros(ncols, dtype=a.dtype)
        v[fc] = 1
        for row, pc in enumerate(pivots):
            v[pc] = (p - int(a[row, fc])) % p
        basis.append(v)
    return basis


def batch_eval(compiled, values, p):
    """Evaluate compiled sparse polynomials at many points.

    compiled: list of (coeffs, factor index tuples) from MultiPoly.compiled()
    values:   (npoints, nvars) residues
    returns:  (npoints, npolys)
    """
    v = np.asarray(values)
    use_obj = p > _SMALL_MAX and p != M61
    v = v.astype(object) if use_obj else _as_u64(v)
    npts = v.shape[0]
    out_cols = []
    for coeffs, factors in compiled:
        acc = np.zeros(npts, dtype=object if use_obj else np.uint64)
        for c, idx in zip(coeffs, factors):
            cr = int(c) % p
            if not idx:
                t = np.full(npts, cr, dtype=acc.dtype)
            else:
                t = v[:, idx[0]]
                for vi in idx[1:]:
                    t = mulmod(t, v[:, vi], p)
                t = mulmod(t, np.full(npts, cr, dtype=acc.dtype), p)
            acc = addmod(acc, t, p)
        out_cols.append(acc)
    return np.stack(out_cols, axis=1)


def matmul_modp_wide(a, b, p):
    """Exact (a @ b) mod p for wide inner dimensions.

    Splits residues into 16-bit limbs so each limb product accumulates
    exactly in float64 BLAS matmuls (inner dim k <= 2^21 keeps partial
    sums below 2^53), then recombines mod p. Complements matmul_modp,
    whose direct path needs k*(p-1)^2 to fit in a 64-bit word.
    """
    a = _as_u64(np.atleast_2d(a))
    b = _as_u64(np.atleast_2d(b))
    k = a.shape[1]
    if b.shape[0] != k:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if k > 1 << 21:
        raise ValueError("inner dimension too wide for exact float64 limbs")
    nl = (p.bit_length() + 15) // 16
    mask = np.uint64(0xFFFF)
    al = [((a >> np.uint64(16 * i)) & mask).astype(np.float64) for i in range(nl)]
    bl = [((b >> np.uint64(16 * j)) & mask).astype(np.float64) for j in range(nl)]
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint64)
    for i in range(nl):
        for j in range(nl):
            s = (al[i] @ bl[j]).astype(np.uint64) % np.uint64(p)
            w = pow(2, 16 * (i + j), p)
            out = addmod(out, mulmod(s, np.uint64(w), p), p)
    return out


def rank_modp_blocked(mat, p, panel=32):
    """Rank over GF(p), geared to matrices with thousands of pivots.

    Panel columns are eliminated with vector operations; each panel's
    contribution to the trailing columns is applied as one
    matmul_modp_wide update instead of per-pivot row operations.
    """
    a = np.array(mat, dtype=np.uint64)
    if a.ndim != 2:
        raise ValueError("rank_modp_blocked wants a 2-D array")
    nrows, ncols = a.shape
    r = 0
    c0 = 0
    while r < nrows and c0 < ncols:
        c1 = min(c0 + panel, ncols)
        pivcols = []
        invs = []
        rr = r
        for c in range(c0, c1):
            if rr == nrows:
                break
            col = a[rr:, c]
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            piv = rr + int(nz[0])
            if piv != rr:
                a[[rr, piv], :] = a[[piv, rr], :]
            inv = np.uint64(pow(int(a[rr, c]), p - 2, p))
            a[rr, c:c1] = mulmod(a[rr, c:c1], inv, p)
            if rr + 1 < nrows and c + 1 < c1:
                # update later panel columns only; a[rr+1:, c] keeps the
                # multipliers for the trailing update below
                fac = a[rr + 1 :, c][:, None]
                a[rr + 1 :, c + 1 : c1] = submod(
                    a[rr + 1 :, c + 1 : c1], mulmod(fac, a[None, rr, c + 1 : c1], p), p
                )
            pivcols.append(c)
            invs.append(inv)
            rr += 1
        npiv = rr - r
        if npiv and c1 < ncols:
            piv_arr = np.array(pivcols)
            # finalize pivot rows left to right, then push one block update
            for t in range(npiv):
                row = r + t
                if t:
                    m = a[row, piv_arr[:t]]
                    contrib = matmul_modp_wide(m[None, :], a[r:row, c1:], p)[0]
                    a[row, c1:] = submod(a[row, c1:], contrib, p)
                a[row, c1:] = mulmod(a[row, c1:], invs[t], p)
            if rr < nrows:
                lower = a[rr:, :][:, piv_arr]
                contrib = matmul_modp_wide(lower, a[r:rr, c1:], p)
                a[rr:, c1:] = submod(a[rr:, c1:], contrib, p)
        r = rr
        c0 = c1
    return r
