"""Special-form 3x3x4 tensors and rank-one normal forms.

The special zero pattern keeps a leading 2x2 block Y_k and the (3,3) entry
per slice. Membership there reduces to a single degree-4 determinant f: the
tensor has border rank at most 4 exactly when f vanishes or every (3,3)
entry does. When f = 0 and the slices stay independent, a change of slice
basis pushes the tensor into a 2x2x4-plus-corner shape.

The normal-form half: given rank-one L = u.v^T and R = x.y^T that make every
L.X_k and X_k.R symmetric, invertible P, Q turn (L, R) into e3.e3^T paired
with one of e3.e3^T, e3.e2^T, e2.e3^T, e2.e2^T. The case is decided by
which of u.x, v.y vanish.
"""

from dataclasses import dataclass

from .matrix import ExactMatrix, normalize_direction
from .modes import RATIONAL
from .poly import MultiPoly, PolyRing, VarRegistry
from .tensor import Tensor3, special_form_flags


class DegenerateSliceError(ValueError):
    """Slice span collapsed below dimension 4; the basis change is undefined."""


def f_det(t: Tensor3):
    """det of the 4x4 matrix whose k-th row lists the leading 2x2 block of
    slice k: (x(1,1,k), x(1,2,k), x(2,1,k), x(2,2,k)). Vanishes exactly when
    the four blocks are linearly dependent."""
    if t.dims != (3, 3, 4):
        raise ValueError(f"f_det needs dims (3,3,4), got {t.dims}")
    rows = [
        [t.get(0, 0, k), t.get(0, 1, k), t.get(1, 0, k), t.get(1, 1, k)]
        for k in range(4)
    ]
    return ExactMatrix(t.mode, rows, copy=False).det()


def f_det_poly(registry=None, mode=None):
    """The same determinant as a 24-term symbolic polynomial."""
    if registry is None:
        registry = VarRegistry.for_tensor(3, 3, 4)
    if mode is None:
        mode = RATIONAL
    ring = PolyRing(registry, mode)

    def xv(i, j, k):
        return MultiPoly.from_var_pos(registry, mode, registry.x_pos(i, j, k))

    rows = [[xv(0, 0, k), xv(0, 1, k), xv(1, 0, k), xv(1, 1, k)] for k in range(4)]
    return ExactMatrix(ring, rows, copy=False).det()


def special_membership(t: Tensor3) -> bool:
    """Border-rank-<=4 verdict on the special stratum: f = 0 or all (3,3)
    entries zero."""
    flags = special_form_flags(t)
    if not flags.special:
        raise ValueError("special_membership wants the special zero pattern")
    if flags.x33_zero:
        return True
    return t.mode.is_zero(f_det(t))


def special_basis_change(t: Tensor3):
    """New slice basis (Z1..Z4, coeffs) with Z1..Z3 supported on the leading
    2x2 block and Z4 a multiple of e3.e3^T; coeffs rows express the Z's in
    the X's. Needs the special pattern, f = 0 and independent slices."""
    flags = special_form_flags(t)
    if not flags.special:
        raise ValueError("special_basis_change wants the special zero pattern")
    md = t.mode
    if not md.is_zero(f_det(t)):
        raise ValueError("special_basis_change needs f = 0")
    if t.flattening(2).rank() < 4:
        raise DegenerateSliceError("slices are linearly dependent")
    blocks = ExactMatrix(
        md,
        [[t.get(0, 0, k), t.get(0, 1, k), t.get(1, 0, k), t.get(1, 1, k)] for k in range(4)],
    )
    ts = [t.get(2, 2, k) for k in range(4)]
    # c combines the slices so the 2x2 blocks cancel; independence forces a
    # leftover (3,3) entry c.ts != 0 for some kernel direction
    c = None
    for cand in blocks.transpose().kernel_basis():
        dot = md.zero
        for ck, tk in zip(cand, ts):
            dot = md.add(dot, md.mul(ck, tk))
        if not md.is_zero(dot):
            c = normalize_direction(md, cand)
            break
    if c is None:
        raise DegenerateSliceError("slices are linearly dependent")
    a_rows = [
        normalize_direction(md, a)
        for a in ExactMatrix.from_rows(md, [ts]).kernel_basis()
    ]
    coeff_rows = a_rows + [c]
    coeffs = ExactMatrix.from_rows(md, coeff_rows)
    slices = t.slices()
    zs = []
    for row in coeff_rows:
        z = [[md.zero] * 3 for _ in range(3)]
        for ck, x in zip(row, slices):
            ck = md.coerce(ck)
            for i in range(3):
                for j in range(3):
                    z[i][j] = md.add(z[i][j], md.mul(ck, x[i][j]))
        zs.append(ExactMatrix(md, z, copy=False))
    return zs, coeffs


# -- rank-one normal forms ---------------------------------------------------


def rank_one_factor(m: ExactMatrix):
    """(u, v) with m = u.v^T exactly; u is the first nonzero column. Raises
    on rank 0 or rank >= 2."""
    md = m.ring
    jstar = None
    for j in range(m.ncols):
        if any(not md.is_zero(m.rows[i][j]) for i in range(m.nrows)):
            jstar = j
            break
    if jstar is None:
        raise ValueError("zero matrix has no rank-one factorization")
    u = [m.rows[i][jstar] for i in range(m.nrows)]
    istar = next(i for i, x in enumerate(u) if not md.is_zero(x))
    pivot = u[istar]
    v = [md.exact_div(m.rows[istar][j], pivot) for j in range(m.ncols)]
    for i in range(m.nrows):
        for j in range(m.ncols):
            if not md.is_zero(md.sub(m.rows[i][j], md.mul(u[i], v[j]))):
                raise ValueError("matrix has rank above one")
    return u, v


@dataclass
class NormalFormCase:
    """Joint normal form of a rank-one pair.

    p and q are the combined transforms: q^T.L.p^(-1) is e3.e3^T up to scale
    and q^(-1).R.p^T is the case_id pattern up to scale (for the transposed
    pair when transposed is set). p_align/q_align are the second-stage
    factors with the lower-triangular-complement zero pattern; p_pre/q_pre
    the first-stage frame moves. effective_case folds E23_E33 into E33_E32
    via the axis swap."""

    case_id: str
    p: ExactMatrix
    q: ExactMatrix
    transposed: bool
    effective_case: str
    p_pre: ExactMatrix
    q_pre: ExactMatrix
    p_align: ExactMatrix
    q_align: ExactMatrix


def _dot(md, a, b):
    acc = md.zero
    for x, y in zip(a, b):
        acc = md.add(acc, md.mul(x, y))
    return acc


def _first_nonzero(md, vec):
    return next(i for i, x in enumerate(vec) if not md.is_zero(x))


def _pre_transforms(md, u, v):
    """P0 with third row v^T, Q0 with first two columns spanning the
    orthogonal complement of u: then Q0^T.u.v^T.P0^(-1) lands on e3.e3^T."""
    iv = _first_nonzero(md, v)
    p_rows = [[md.one if j == e else md.zero for j in range(3)] for e in range(3) if e != iv]
    p_rows.append(list(v))
    p0 = ExactMatrix.from_rows(md, p_rows)
    perp = [normalize_direction(md, w) for w in ExactMatrix.from_rows(md, [u]).kernel_basis()]
    iu = _first_nonzero(md, u)
    e_col = [md.one if i == iu else md.zero for i in range(3)]
    q_cols = perp + [e_col]
    q0 = ExactMatrix.from_rows(md, q_cols).transpose()
    return p0, q0


def _axis_align_matrix(md, y):
    """Invertible M with rows in the (*,*,0-free) pattern [[*,0,*],[0,*,*],
    [0,0,*]] when y3 != 0 (then M.y is along e3), or block-diagonal
    P1 + [1] when y3 = 0 (then M.y is along e2)."""
    y1, y2, y3 = y
    if not md.is_zero(y3):
        rows = [
            [y3, md.zero, md.neg(y1)],
            [md.zero, y3, md.neg(y2)],
            [md.zero, md.zero, md.one],
        ]
        return ExactMatrix.from_rows(md, rows), 2
    if not md.is_zero(y1):
        p1 = [[y2, md.neg(y1)], [md.one, md.zero]]
    else:
        p1 = [[y2, md.neg(y1)], [md.zero, md.one]]
    rows = [
        [p1[0][0], p1[0][1], md.zero],
        [p1[1][0], p1[1][1], md.zero],
        [md.zero, md.zero, md.one],
    ]
    return ExactMatrix.from_rows(md, rows), 1


def _apply_inv(md, m, vec):
    """m^(-1).vec via the adjugate (small fixed size, stays exact)."""
    adj = m.adjugate()
    det = m.det()
    return [md.exact_div(_dot(md, row, vec), det) for row in adj.rows]


def _normalize_core(l, r):
    md = l.ring
    u, v = rank_one_factor(l)
    x, y = rank_one_factor(r)
    p0, q0 = _pre_transforms(md, u, v)
    x1 = _apply_inv(md, q0, x)
    y1 = [_dot(md, row, y) for row in p0.rows]
    p_al, row_y = _axis_align_matrix(md, y1)
    q1, row_x = _axis_align_matrix(md, x1)  # q1 plays Q^(-1); same pattern rules
    q_al = q1.adjugate()  # Q = q1^(-1) up to the det factor; scale is free
    p = p_al.matmul(p0)
    q = q0.matmul(q_al)
    case = {
        (2, 2): "E33_E33",
        (2, 1): "E33_E32",
        (1, 2): "E23_E33",
        (1, 1): "E22_E22",
    }[(row_x, row_y)]
    return case, p, q, p0, q0, p_al, q_al


def normalize_pair(l: ExactMatrix, r: ExactMatrix) -> NormalFormCase:
    """Classify and normalize a rank-one pair. E23_E33 inputs are first
    transposed (the tensor-axis swap sends (L, R) to (R^T, L^T)), so the
    returned transforms realize the effective E33_E32 form."""
    md = l.ring
    u, v = rank_one_factor(l)
    x, y = rank_one_factor(r)
    ux = _dot(md, u, x)
    vy = _dot(md, v, y)
    case_id = {
        (False, False): "E33_E33",
        (False, True): "E33_E32",
        (True, False): "E23_E33",
        (True, True): "E22_E22",
    }[(md.is_zero(ux), md.is_zero(vy))]
    transposed = case_id == "E23_E33"
    if transposed:
        core_case, p, q, p0, q0, p_al, q_al = _normalize_core(
            r.transpose(), l.transpose()
        )
        effective = core_case
    else:
        core_case, p, q, p0, q0, p_al, q_al = _normalize_core(l, r)
        effective = core_case
        if core_case != case_id:
            raise AssertionError(f"case mismatch: {core_case} vs {case_id}")
    return NormalFormCase(
        case_id=case_id,
        p=p,
        q=q,
        transposed=transposed,
        effective_case=effective,
        p_pre=p0,
        q_pre=q0,
        p_align=p_al,
        q_align=q_al,
    )
