"""Degree-9 symmetrization conditions for 3x3x4 tensors.

A tensor with frontal slices X_1..X_4 has border rank at most 4 exactly when
nonzero L and R exist making every L.X_k and X_k.R symmetric, together with
a trace compatibility between L and R. The symmetry requirements are linear
in L (resp. R): stacking the strictly upper entries of L.X_k - (L.X_k)^T
over k gives a 12x9 matrix CL acting on vec(L), and similarly CR on vec(R).
Rank below 9 on both sides is the degree-9 condition (all 9x9 minors vanish);
the trace condition on the extracted kernel directions is the degree-16 part.
"""

from dataclasses import dataclass
from itertools import combinations

from .matrix import ExactMatrix, normalize_direction
from .modes import RATIONAL
from .poly import MultiPoly, PolyRing, VarRegistry
from .report import MEMBER, NON_MEMBER, MembershipReport, Stage, mode_label
from .tensor import Tensor3

_UPPER = ((0, 1), (0, 2), (1, 2))

MINOR_COUNT = 220  # C(12, 9) row choices; all 9 columns are always used


@dataclass
class SymSystem:
    mode: object
    cl: ExactMatrix
    cr: ExactMatrix
    row_map: tuple  # row index -> (slice k, upper position (a, b)), 1-based
    col_map: tuple  # column index -> (row, col) of L (or R), 1-based


def sym_rows_from_slices(slices, ring):
    """CL and CR rows from four 3x3 slices with entries in `ring`.

    Row (k, (a,b)) of CL is the (a,b) entry of L.X_k - (L.X_k)^T as a linear
    form in vec(L) (row-major); same for CR with X_k.R - (X_k.R)^T in vec(R).
    """
    z = ring.zero
    rows_l = []
    rows_r = []
    for x in slices:
        for a, b in _UPPER:
            row_l = [z] * 9
            row_r = [z] * 9
            for c in range(3):
                # (L.X)[a,b] - (L.X)[b,a] = sum_c L[a,c] X[c,b] - L[b,c] X[c,a]
                row_l[3 * a + c] = ring.add(row_l[3 * a + c], x[c][b])
                row_l[3 * b + c] = ring.sub(row_l[3 * b + c], x[c][a])
                # (X.R)[a,b] - (X.R)[b,a] = sum_c X[a,c] R[c,b] - X[b,c] R[c,a]
                row_r[3 * c + b] = ring.add(row_r[3 * c + b], x[a][c])
                row_r[3 * c + a] = ring.sub(row_r[3 * c + a], x[b][c])
            rows_l.append(row_l)
            rows_r.append(row_r)
    return rows_l, rows_r


def _maps():
    row_map = tuple((k, (a + 1, b + 1)) for k in range(1, 5) for a, b in _UPPER)
    col_map = tuple((i + 1, j + 1) for i in range(3) for j in range(3))
    return row_map, col_map


def build_sym_matrices(t: Tensor3) -> SymSystem:
    if t.dims != (3, 3, 4):
        raise ValueError(f"symmetrization system needs dims (3,3,4), got {t.dims}")
    if not t.mode.is_exact:
        raise ValueError("symmetrization system needs an exact mode")
    rows_l, rows_r = sym_rows_from_slices(t.slices(), t.mode)
    row_map, col_map = _maps()
    return SymSystem(
        t.mode,
        ExactMatrix(t.mode, rows_l, copy=False),
        ExactMatrix(t.mode, rows_r, copy=False),
        row_map,
        col_map,
    )


def build_sym_symbolic(registry=None, mode=RATIONAL):
    """CL, CR over the polynomial ring in the 36 tensor variables."""
    if registry is None:
        registry = VarRegistry.for_tensor(3, 3, 4)
    ring = PolyRing(registry, mode)

    def xv(i, j, k):
        return MultiPoly.from_var_pos(registry, mode, registry.x_pos(i, j, k))

    slices = [[[xv(i, j, k) for j in range(3)] for i in range(3)] for k in range(4)]
    rows_l, rows_r = sym_rows_from_slices(slices, ring)
    row_map, col_map = _maps()
    return SymSystem(
        ring,
        ExactMatrix(ring, rows_l, copy=False),
        ExactMatrix(ring, rows_r, copy=False),
        row_map,
        col_map,
    )


def minor_row_sets():
    """The 220 row choices behind the degree-9 minors, in lexicographic order."""
    return list(combinations(range(12), 9))


def _nonzero_minor(mat):
    """A nonzero 9x9 minor of a rank-9 12x9 matrix, via an independent row set."""
    rows = tuple(mat.independent_rows())
    cols = tuple(range(9))
    sub = [[mat.rows[r][c] for c in cols] for r in rows]
    val = ExactMatrix(mat.ring, sub, copy=False).det()
    return rows, cols, val


def sym9_test(system: SymSystem):
    """(passed, witness): pass iff both ranks stay below 9. The witness names
    one nonzero 9x9 minor per offending side."""
    rank_l = system.cl.rank()
    rank_r = system.cr.rank()
    if rank_l <= 8 and rank_r <= 8:
        return True, None
    witness = {"rank_cl": rank_l, "rank_cr": rank_r, "minors": []}
    for side, mat, rank in (("CL", system.cl, rank_l), ("CR", system.cr, rank_r)):
        if rank == 9:
            rows, cols, val = _nonzero_minor(mat)
            witness["minors"].append(
                {"side": side, "rows": rows, "cols": cols, "value": val}
            )
    return False, witness


def extract_LR(system: SymSystem):
    """(L, R, defined). Defined only when both ranks equal 8, in which case
    L and R are the kernel directions reshaped 3x3 row-major. Rank 9 on
    either side is a precondition violation (run sym9_test first)."""
    rank_l = system.cl.rank()
    rank_r = system.cr.rank()
    if rank_l > 8 or rank_r > 8:
        raise ValueError(
            f"extract_LR called with rank(CL)={rank_l}, rank(CR)={rank_r}; "
            "the degree-9 test must pass first"
        )
    if rank_l < 8 or rank_r < 8:
        return None, None, False
    md = system.mode
    vl = normalize_direction(md, system.cl.kernel_basis()[0])
    vr = normalize_direction(md, system.cr.kernel_basis()[0])
    l = ExactMatrix.from_rows(md, [vl[0:3], vl[3:6], vl[6:9]])
    r = ExactMatrix.from_rows(md, [vr[0:3], vr[3:6], vr[6:9]])
    return l, r, True


def trace16_check(l: ExactMatrix, r: ExactMatrix) -> bool:
    """L.R^T = R^T.L = (tr(L.R^T)/3).I, checked as 3*(L.R^T) = t.I and
    3*(R^T.L) = t.I with t the trace (no division, scale invariant)."""
    if l.nrows != 3 or l.ncols != 3 or r.nrows != 3 or r.ncols != 3:
        raise ValueError("trace16_check wants 3x3 inputs")
    md = l.ring
    rt = r.transpose()
    a = l.matmul(rt)
    b = rt.matmul(l)
    t = md.add(md.add(a[0, 0], a[1, 1]), a[2, 2])
    three = md.from_int(3)
    for m in (a, b):
        for i in range(3):
            for j in range(3):
                want = t if i == j else md.zero
                if not md.is_zero(md.sub(md.mul(three, m[i, j]), want)):
                    return False
    return True


def membership_routeA(t: Tensor3) -> MembershipReport:
    """Degree 9 + degree 16 membership for 3x3x4 tensors."""
    system = build_sym_matrices(t)
    passed9, witness9 = sym9_test(system)
    stages = [Stage("sym9", passed9, witness=witness9)]
    if not passed9:
        return MembershipReport(NON_MEMBER, "A", stages, mode_label(t.mode))
    l, r, defined = extract_LR(system)
    if not defined:
        stages.append(
            Stage(
                "trace16",
                True,
                info={"vacuous": True, "rank_cl": system.cl.rank(), "rank_cr": system.cr.rank()},
            )
        )
        return MembershipReport(MEMBER, "A", stages, mode_label(t.mode))
    ok16 = trace16_check(l, r)
    stages.append(
        Stage(
            "trace16",
            ok16,
            witness=None
            if ok16
            else {"L": [row[:] for row in l.rows], "R": [row[:] for row in r.rows]},
        )
    )
    verdict = MEMBER if ok16 else NON_MEMBER
    return MembershipReport(verdict, "A", stages, mode_label(t.mode))
