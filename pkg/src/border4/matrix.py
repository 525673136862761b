"""Dense exact matrices with fraction-free elimination.

Determinant, adjugate and minors run fraction-free Bareiss steps and work over
any exact ring that supports exact division (rationals, prime fields,
polynomial rings). Rank and kernel need a field and reject polynomial rings;
all exact operations reject FLOAT64 data.
"""

from fractions import Fraction
from itertools import combinations

from .modes import ExactnessError, RationalMode


def _require_exact(ring):
    if not getattr(ring, "is_exact", True):
        raise ExactnessError("exact linear algebra rejects FLOAT64 matrices")


def _require_field(ring):
    _require_exact(ring)
    if not getattr(ring, "is_field", False):
        raise ExactnessError("operation needs a field (rationals or GF(p))")


class ExactMatrix:
    """Row-major matrix over an exact ring (a Mode or a PolyRing)."""

    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, ring, rows, copy=True):
        self.ring = ring
        self.rows = [list(r) for r in rows] if copy else rows
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != self.ncols:
                raise ValueError("ragged rows")

    @classmethod
    def from_rows(cls, ring, rows):
        return cls(ring, [[ring.coerce(x) for x in r] for r in rows], copy=False)

    @classmethod
    def zeros(cls, ring, n, m):
        z = ring.zero
        return cls(ring, [[z] * m for _ in range(n)], copy=False)

    @classmethod
    def identity(cls, ring, n):
        z, o = ring.zero, ring.one
        return cls(ring, [[o if i == j else z for j in range(n)] for i in range(n)], copy=False)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and self.ring == other.ring
            and self.rows == other.rows
        )

    def __repr__(self):
        return f"ExactMatrix({self.ring!r}, {self.rows!r})"

    def copy(self):
        return ExactMatrix(self.ring, self.rows)

    def transpose(self):
        return ExactMatrix(
            self.ring,
            [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
            copy=False,
        )

    def _check_peer(self, other):
        if self.ring != other.ring:
            raise TypeError(f"ring mismatch: {self.ring!r} vs {other.ring!r}")

    def add(self, other):
        self._check_peer(other)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        rng = self.ring
        return ExactMatrix(
            rng,
            [
                [rng.add(a, b) for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ],
            copy=False,
        )

    def sub(self, other):
        return self.add(other.scale(self.ring.neg(self.ring.one)))

    def scale(self, c):
        rng = self.ring
        return ExactMatrix(rng, [[rng.mul(c, x) for x in r] for r in self.rows], copy=False)

    def matmul(self, other):
        self._check_peer(other)
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        rng = self.ring
        bt = other.transpose().rows
        out = []
        for ra in self.rows:
            row = []
            for cb in bt:
                acc = rng.zero
                for a, b in zip(ra, cb):
                    acc = rng.add(acc, rng.mul(a, b))
                row.append(acc)
            out.append(row)
        return ExactMatrix(rng, out, copy=False)

    def is_zero(self):
        rng = self.ring
        return all(rng.is_zero(x) for r in self.rows for x in r)

    # -- elimination ----------------------------------------------------

    def det(self):
        _require_exact(self.ring)
        if self.nrows != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        if self.nrows == 0:
            return self.ring.one
        if isinstance(self.ring, RationalMode):
            rows, scale = _int_scaled_rows(self.rows)
            d = _bareiss_det_int(rows)
            return self.ring.exact_div(d, scale)
        return _bareiss_det_ring(self.ring, [list(r) for r in self.rows])

    def adjugate(self):
        _require_exact(self.ring)
        n = self.nrows
        if n != self.ncols:
            raise ValueError("adjugate of a non-square matrix")
        rng = self.ring
        if n == 1:
            return ExactMatrix(rng, [[rng.one]], copy=False)
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                # adj[i][j] is the (j,i) cofactor
                sub = [
                    [self.rows[r][c] for c in range(n) if c != i]
                    for r in range(n)
                    if r != j
                ]
                cof = ExactMatrix(rng, sub, copy=False).det()
                out[i][j] = cof if (i + j) % 2 == 0 else rng.neg(cof)
        return ExactMatrix(rng, out, copy=False)

    def rank(self):
        _require_field(self.ring)
        if isinstance(self.ring, RationalMode):
            rows, _ = _int_scaled_rows(self.rows)
            return _rank_int(rows)
        return _rank_field(self.ring, [list(r) for r in self.rows])

    def rref(self):
        """Reduced row echelon form; returns (matrix, pivot column list)."""
        _require_field(self.ring)
        rng = self.ring
        rows = [list(r) for r in self.rows]
        pivots = []
        pr = 0
        for pc in range(self.ncols):
            pivot = None
            for r in range(pr, self.nrows):
                if not rng.is_zero(rows[r][pc]):
                    pivot = r
                    break
            if pivot is None:
                continue
            rows[pr], rows[pivot] = rows[pivot], rows[pr]
            inv = rng.inv(rows[pr][pc])
            rows[pr] = [rng.mul(inv, x) for x in rows[pr]]
            for r in range(self.nrows):
                if r != pr and not rng.is_zero(rows[r][pc]):
                    f = rows[r][pc]
                    rows[r] = [
                        rng.sub(x, rng.mul(f, y)) for x, y in zip(rows[r], rows[pr])
                    ]
            pivots.append(pc)
            pr += 1
            if pr == self.nrows:
                break
        return ExactMatrix(rng, rows, copy=False), pivots

    def kernel_basis(self):
        """Basis of the right null space, one vector per free column."""
        rr, pivots = self.rref()
        rng = self.ring
        free = [c for c in range(self.ncols) if c not in pivots]
        basis = []
        for fc in free:
            v = [rng.zero] * self.ncols
            v[fc] = rng.one
            for r, pc in enumerate(pivots):
                v[pc] = rng.neg(rr.rows[r][fc])
            basis.append(v)
        return basis

    def independent_rows(self):
        """Indices of a maximal independent row set (in increasing order)."""
        _require_field(self.ring)
        rt = self.transpose()
        _, pivots = rt.rref()
        return pivots

    def minor_values(self, size, row_sets=None, col_sets=None):
        """All size x size minors as (rows, cols, value), lexicographic order."""
        _require_exact(self.ring)
        rs = (
            list(row_sets)
            if row_sets is not None
            else list(combinations(range(self.nrows), size))
        )
        cs = (
            list(col_sets)
            if col_sets is not None
            else list(combinations(range(self.ncols), size))
        )
        out = []
        for rset in rs:
            sub_rows = [self.rows[r] for r in rset]
            for cset in cs:
                sub = [[row[c] for c in cset] for row in sub_rows]
                val = ExactMatrix(self.ring, sub, copy=False).det()
                out.append((tuple(rset), tuple(cset), val))
        return out


# -- low level kernels ----------------------------------------------------


def _int_scaled_rows(rows):
    """Clear denominators row by row; returns (int rows, det scale factor)."""
    out = []
    scale = 1
    for r in rows:
        lcm = 1
        for x in r:
            if isinstance(x, Fraction):
                d = x.denominator
                if d != 1:
                    g = _gcd(lcm, d)
                    lcm = lcm // g * d
        if lcm == 1:
            out.append([int(x) for x in r])
        else:
            out.append([int(x * lcm) for x in r])
            scale *= lcm
    return out, scale


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _bareiss_det_int(rows):
    """Fraction-free determinant of a square integer matrix (destructive)."""
    n = len(rows)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            for r in range(k + 1, n):
                if rows[r][k] != 0:
                    rows[k], rows[r] = rows[r], rows[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = rows[k][k]
        for i in range(k + 1, n):
            ri = rows[i]
            rk = rows[k]
            fik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * pk - fik * rk[j]) // prev
            ri[k] = 0
        prev = pk
    return sign * rows[n - 1][n - 1]


def _bareiss_det_ring(ring, rows):
    """Bareiss over a generic exact ring; divisions are exact by construction."""
    n = len(rows)
    neg_one = ring.neg(ring.one)
    sign = ring.one
    prev = ring.one
    for k in range(n - 1):
        if ring.is_zero(rows[k][k]):
            for r in range(k + 1, n):
                if not ring.is_zero(rows[r][k]):
                    rows[k], rows[r] = rows[r], rows[k]
                    sign = ring.mul(sign, neg_one)
                    break
            else:
                return ring.zero
        pk = rows[k][k]
        for i in range(k + 1, n):
            fik = rows[i][k]
            for j in range(k + 1, n):
                num = ring.sub(ring.mul(rows[i][j], pk), ring.mul(fik, rows[k][j]))
                rows[i][j] = ring.exact_div(num, prev)
            rows[i][k] = ring.zero
        prev = pk
    return ring.mul(sign, rows[n - 1][n - 1])


def _rank_int(rows):
    """Rank of an integer matrix by fraction-free elimination, full pivoting."""
    rows = [list(r) for r in rows]
    n = len(rows)
    if n == 0:
        return 0
    m = len(rows[0])
    rank = 0
    prev = 1
    k = 0
    while k < min(n, m):
        # full pivot search in the trailing block
        pr = pc = None
        for i in range(k, n):
            for j in range(k, m):
                if rows[i][j] != 0:
                    pr, pc = i, j
                    break
            if pr is not None:
                break
        if pr is None:
            break
        rows[k], rows[pr] = rows[pr], rows[k]
        if pc != k:
            for r in rows:
                r[k], r[pc] = r[pc], r[k]
        pk = rows[k][k]
        for i in range(k + 1, n):
            ri = rows[i]
            fik = ri[k]
            for j in range(k + 1, m):
                ri[j] = (ri[j] * pk - fik * rows[k][j]) // prev
            ri[k] = 0
        prev = pk
        rank += 1
        k += 1
    return rank


def _rank_field(ring, rows):
    n = len(rows)
    if n == 0:
        return 0
    m = len(rows[0])
    rank = 0
    for pc in range(m):
        pivot = None
        for r in range(rank, n):
            if not ring.is_zero(rows[r][pc]):
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = ring.inv(rows[rank][pc])
        prow = [ring.mul(inv, x) for x in rows[rank]]
        rows[rank] = prow
        for r in range(rank + 1, n):
            f = rows[r][pc]
            if not ring.is_zero(f):
                rows[r] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(rows[r], prow)]
        rank += 1
        if rank == n:
            break
    return rank


def normalize_direction(ring, vec):
    """Deterministic representative of a line: over the rationals, coprime
    integers with positive leading entry; over a prime field, leading entry 1."""
    vec = list(vec)
    if isinstance(ring, RationalMode):
        from math import gcd, lcm

        den = 1
        for x in vec:
            den = lcm(den, Fraction(x).denominator)
        ints = [int(Fraction(x) * den) for x in vec]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if g:
            ints = [v // g for v in ints]
        lead = next((v for v in ints if v), 0)
        if lead < 0:
            ints = [-v for v in ints]
        return ints
    lead = next((x for x in vec if not ring.is_zero(x)), None)
    if lead is None:
        return vec
    inv = ring.inv(lead)
    return [ring.mul(inv, x) for x in vec]
