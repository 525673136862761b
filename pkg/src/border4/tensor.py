"""Third-order tensors, slicing, samplers and JSON serialization.

Entries are stored flat with the third index slowest, then the first, then
the second: position(i, j, k) = (k*m + i)*n + j for 0-based indices and dims
(m, n, l). Sections along an axis are matrices over the remaining two axes,
the smaller-numbered axis indexing rows.
"""

import json
import random
from dataclasses import dataclass

from .matrix import ExactMatrix
from .modes import FLOAT64, RATIONAL, ModeError, PrimeFieldMode, mode_from_json, mode_to_json


class Tensor3:
    __slots__ = ("dims", "mode", "entries")

    def __init__(self, dims, mode, entries, copy=True):
        m, n, l = dims
        if m * n * l != len(entries):
            raise ValueError(f"need {m * n * l} entries for dims {dims}, got {len(entries)}")
        self.dims = (m, n, l)
        self.mode = mode
        self.entries = list(entries) if copy else entries

    @classmethod
    def from_entries(cls, dims, mode, entries):
        return cls(dims, mode, [mode.coerce(x) for x in entries], copy=False)

    @classmethod
    def zeros(cls, dims, mode):
        m, n, l = dims
        return cls(dims, mode, [mode.zero] * (m * n * l), copy=False)

    def pos(self, i, j, k):
        m, n, _ = self.dims
        return (k * m + i) * n + j

    def get(self, i, j, k):
        return self.entries[self.pos(i, j, k)]

    def with_entry(self, i, j, k, value):
        out = list(self.entries)
        out[self.pos(i, j, k)] = self.mode.coerce(value)
        return Tensor3(self.dims, self.mode, out, copy=False)

    def __eq__(self, other):
        return (
            isinstance(other, Tensor3)
            and self.dims == other.dims
            and self.mode == other.mode
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"Tensor3(dims={self.dims}, mode={self.mode!r})"

    # -- sections ---------------------------------------------------------

    def slice_rows(self, axis, index):
        """One section as a list of row lists."""
        m, n, l = self.dims
        e = self.entries
        if axis == 2:
            k = index
            return [[e[(k * m + i) * n + j] for j in range(n)] for i in range(m)]
        if axis == 0:
            i = index
            return [[e[(k * m + i) * n + j] for k in range(l)] for j in range(n)]
        if axis == 1:
            j = index
            return [[e[(k * m + i) * n + j] for k in range(l)] for i in range(m)]
        raise ValueError(f"axis must be 0, 1 or 2, got {axis}")

    def slices(self, axis=2):
        return [self.slice_rows(axis, t) for t in range(self.dims[axis])]

    def slice_matrix(self, axis, index):
        return ExactMatrix(self.mode, self.slice_rows(axis, index), copy=False)

    def flattening(self, axis):
        """Axis flattening as an ExactMatrix (remaining axes, last fastest)."""
        m, n, l = self.dims
        if axis == 0:
            rows = [[self.get(i, j, k) for j in range(n) for k in range(l)] for i in range(m)]
        elif axis == 1:
            rows = [[self.get(i, j, k) for i in range(m) for k in range(l)] for j in range(n)]
        elif axis == 2:
            rows = [[self.get(i, j, k) for i in range(m) for j in range(n)] for k in range(l)]
        else:
            raise ValueError(f"axis must be 0, 1 or 2, got {axis}")
        return ExactMatrix(self.mode, rows, copy=False)

    def flattening_ranks(self):
        return tuple(self.flattening(a).rank() for a in range(3))

    # -- transforms -------------------------------------------------------

    def cast(self, mode):
        if mode == self.mode:
            return self
        if isinstance(mode, PrimeFieldMode) or mode in (RATIONAL, FLOAT64):
            return Tensor3(
                self.dims, mode, [mode.coerce(x) for x in self.entries], copy=False
            )
        raise ModeError(f"cannot cast into {mode!r}")

    def norm_inf(self):
        return max((abs(x) for x in self.entries), default=0)

    def permute_axes(self, perm):
        """New tensor S with S[idx] = T[idx applied to perm]: axis a of S is
        axis perm[a] of T."""
        if sorted(perm) != [0, 1, 2]:
            raise ValueError(f"bad axis permutation {perm}")
        dims = tuple(self.dims[perm[a]] for a in range(3))
        out = Tensor3.zeros(dims, self.mode)
        src = [0, 0, 0]
        for i in range(dims[0]):
            for j in range(dims[1]):
                for k in range(dims[2]):
                    new_idx = (i, j, k)
                    for a in range(3):
                        src[perm[a]] = new_idx[a]
                    out.entries[out.pos(i, j, k)] = self.get(*src)
        return out

    def basis_change(self, A, B, C):
        """Apply invertible maps per axis: result[i,j,k] =
        sum A[i][a] * B[j][b] * C[k][c] * T[a,b,c]."""
        m, n, l = self.dims
        md = self.mode
        rows_a = A.rows if isinstance(A, ExactMatrix) else A
        rows_b = B.rows if isinstance(B, ExactMatrix) else B
        rows_c = C.rows if isinstance(C, ExactMatrix) else C
        out = []
        for k in range(l):
            # S_k = sum_c C[k][c] * (A X_c B^T)
            acc = [[md.zero] * n for _ in range(m)]
            for c in range(l):
                ckc = rows_c[k][c]
                if md.is_zero(ckc):
                    continue
                xc = self.slice_rows(2, c)
                axc = _mat_mul(md, rows_a, xc)
                axcbt = _mat_mul_bt(md, axc, rows_b)
                for i in range(m):
                    for j in range(n):
                        acc[i][j] = md.add(acc[i][j], md.mul(ckc, axcbt[i][j]))
            for i in range(m):
                out.extend(acc[i])
        return Tensor3(self.dims, md, out, copy=False)

    # -- serialization ----------------------------------------------------

    def to_json_dict(self):
        name, modulus = mode_to_json(self.mode)
        obj = {"dims": list(self.dims), "mode": name}
        if modulus is not None:
            obj["modulus"] = modulus
        obj["entries"] = [self.mode.format_entry(x) for x in self.entries]
        return obj

    @classmethod
    def from_json_dict(cls, obj):
        try:
            dims = tuple(int(d) for d in obj["dims"])
            mode = mode_from_json(obj["mode"], obj.get("modulus"))
            entries = [mode.parse_entry(x) for x in obj["entries"]]
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad tensor JSON: {exc}") from exc
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"bad dims {dims}")
        return cls(dims, mode, entries, copy=False)


def _mat_mul(md, a_rows, b_rows):
    n_inner = len(b_rows)
    n_cols = len(b_rows[0])
    out = []
    for ra in a_rows:
        row = []
        for j in range(n_cols):
            acc = md.zero
            for t in range(n_inner):
                acc = md.add(acc, md.mul(ra[t], b_rows[t][j]))
            row.append(acc)
        out.append(row)
    return out


def _mat_mul_bt(md, a_rows, b_rows):
    """a @ b^T for row lists."""
    out = []
    for ra in a_rows:
        row = []
        for rb in b_rows:
            acc = md.zero
            for x, y in zip(ra, rb):
                acc = md.add(acc, md.mul(x, y))
            row.append(acc)
        out.append(row)
    return out


def tensor_to_json(t: Tensor3) -> str:
    return json.dumps(t.to_json_dict(), separators=(",", ":"))


def tensor_from_json(s: str) -> Tensor3:
    return Tensor3.from_json_dict(json.loads(s))


def write_tensor(path, t: Tensor3) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(tensor_to_json(t))
        fh.write("\n")


def read_tensor(path) -> Tensor3:
    with open(path, "r", encoding="utf-8") as fh:
        return tensor_from_json(fh.read())


# -- the special 3x3x4 zero pattern ----------------------------------------

SPECIAL_ZERO_POSITIONS = tuple(
    (i, j) for (i, j) in ((0, 2), (1, 2), (2, 0), (2, 1))
)


@dataclass(frozen=True)
class SpecialFormFlags:
    """Zero-pattern classification of a 3x3x4 tensor."""

    special: bool
    x33_zero: bool


def is_special_form(t: Tensor3) -> bool:
    if t.dims != (3, 3, 4):
        return False
    md = t.mode
    return all(
        md.is_zero(t.get(i, j, k)) for (i, j) in SPECIAL_ZERO_POSITIONS for k in range(4)
    )


def special_form_flags(t: Tensor3) -> SpecialFormFlags:
    sp = is_special_form(t)
    md = t.mode
    x33 = sp and all(md.is_zero(t.get(2, 2, k)) for k in range(4))
    return SpecialFormFlags(special=sp, x33_zero=x33)


# -- samplers ---------------------------------------------------------------


def sample_rank_r(dims, r, coeff_bound=9, seed=0, mode=RATIONAL):
    """Sum of r random integer rank-one tensors; exact member of the
    border-rank-<=r set by construction."""
    m, n, l = dims
    rng = random.Random(seed)
    entries = [0] * (m * n * l)
    for _ in range(r):
        a = [rng.randint(-coeff_bound, coeff_bound) for _ in range(m)]
        b = [rng.randint(-coeff_bound, coeff_bound) for _ in range(n)]
        c = [rng.randint(-coeff_bound, coeff_bound) for _ in range(l)]
        p = 0
        for k in range(l):
            for i in range(m):
                for j in range(n):
                    entries[p] += a[i] * b[j] * c[k]
                    p += 1
    t = Tensor3(dims, RATIONAL, entries, copy=False)
    return t if mode == RATIONAL else t.cast(mode)


def sample_generic(dims, coeff_bound=9, seed=0, mode=RATIONAL):
    m, n, l = dims
    rng = random.Random(seed)
    entries = [rng.randint(-coeff_bound, coeff_bound) for _ in range(m * n * l)]
    t = Tensor3(dims, RATIONAL, entries, copy=False)
    return t if mode == RATIONAL else t.cast(mode)


def sample_special_form(
    coeff_bound=9, seed=0, x33_zero=False, force_f_zero=False, mode=RATIONAL
):
    """Random tensor with the special 3x3x4 zero pattern. x33_zero clears the
    (3,3,k) entries; force_f_zero makes the fourth leading 2x2 block a linear
    combination of the first three."""
    rng = random.Random(seed)
    blocks = [
        [[rng.randint(-coeff_bound, coeff_bound) for _ in range(2)] for _ in range(2)]
        for _ in range(4)
    ]
    if force_f_zero:
        cs = [rng.randint(-3, 3) for _ in range(3)]
        blocks[3] = [
            [sum(cs[t] * blocks[t][i][j] for t in range(3)) for j in range(2)]
            for i in range(2)
        ]
    ts = [0 if x33_zero else rng.randint(-coeff_bound, coeff_bound) for _ in range(4)]
    entries = []
    for k in range(4):
        y = blocks[k]
        entries.extend([y[0][0], y[0][1], 0, y[1][0], y[1][1], 0, 0, 0, ts[k]])
    t = Tensor3((3, 3, 4), RATIONAL, entries, copy=False)
    return t if mode == RATIONAL else t.cast(mode)


def sample_essentially_234(coeff_bound=9, seed=0, mode=RATIONAL):
    """Zero pattern x(1,3,k) = x(3,1,k) = x(3,2,k) = x(3,3,k) = 0: the tensor
    acts on a 2x3x4 space, so its border rank is at most 4."""
    rng = random.Random(seed)
    entries = []
    for _ in range(4):
        row0 = [rng.randint(-coeff_bound, coeff_bound) for _ in range(2)] + [0]
        row1 = [rng.randint(-coeff_bound, coeff_bound) for _ in range(3)]
        row2 = [0, 0, 0]
        entries.extend(row0 + row1 + row2)
    t = Tensor3((3, 3, 4), RATIONAL, entries, copy=False)
    return t if mode == RATIONAL else t.cast(mode)
