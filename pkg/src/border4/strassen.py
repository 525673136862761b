"""Degree-5 commutative conditions on 4x4x4 tensors.

Fix a direction l in {1, 2, 3} and let X_1, ..., X_4 be the four l-sections
of a 4x4x4 tensor. Substituting U_i = sum_j u[j,i] * X_j into

    E(u) = U1 adj(U2) U3 - U3 adj(U2) U1

gives a matrix that vanishes identically in u whenever the tensor has
border rank <= 4. Each u-coefficient of an entry of E is a polynomial of
degree 5 in the tensor entries, of multidegree (1, 3, 1) across the three
u-columns; together these span the degree-5 piece of the border-rank
conditions.

Membership testing is evaluation-first: fix the tensor numerically and
test E at random u over an exact mode. E has u-degree 5, so over GF(p) a
nonzero E survives one random trial with probability at most 5/p.
strassen_generate performs the symbolic coefficient extraction;
strassen_dimension measures the rank of the span by evaluating every
coefficient at random tensors, batched with numpy.
"""

import random
import warnings
from dataclasses import dataclass

import numpy as np

from .matrix import ExactMatrix
from .modbatch import addmod, mulmod, rank_modp_blocked, submod
from .modes import ExactnessError, ModeError, prime_field
from .poly import MultiPoly, PolyRing, VarRegistry, mon_mul, mon_sorted_desc, write_poly_file
from .tensor import Tensor3

DEFAULT_TRIALS = 32
DEFAULT_TERM_BUDGET = 4_000_000
_RATIONAL_BOUND = 2**31 - 1


class BudgetExceededError(RuntimeError):
    """A symbolic expansion outgrew its term budget."""


def _trial_rng(seed, l, trial):
    return random.Random(f"{seed}:{l}:{trial}")


def l_sections(t, l):
    """The four l-sections of a 4x4x4 tensor, as matrices indexed by the
    two remaining axes in increasing order."""
    if t.dims != (4, 4, 4):
        raise ValueError(f"need a 4x4x4 tensor, got {t.dims}")
    if l not in (1, 2, 3):
        raise ValueError(f"direction must be 1, 2 or 3, got {l}")
    return [t.slice_matrix(l - 1, s) for s in range(4)]


# -- numeric evaluation ----------------------------------------------------


def strassen_eval(t, l, trials=DEFAULT_TRIALS, seed=0):
    """Randomized test of the degree-5 conditions in direction l.

    Draws u, forms E(u) exactly, and passes iff E = 0 in every trial.
    Returns (True, None) or (False, witness) with the first offending
    (u, entry, value).
    """
    md = t.mode
    if not getattr(md, "is_exact", False):
        raise ExactnessError("degree-5 evaluation needs an exact mode")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    xs = l_sections(t, l)
    for trial in range(trials):
        rng = _trial_rng(seed, l, trial)
        u = [[md.rand(rng, _RATIONAL_BOUND) for _ in range(3)] for _ in range(4)]
        us = []
        for i in range(3):
            acc = ExactMatrix.zeros(md, 4, 4)
            for j in range(4):
                acc = acc.add(xs[j].scale(u[j][i]))
            us.append(acc)
        adj2 = us[1].adjugate()
        left = us[0].matmul(adj2).matmul(us[2])
        right = us[2].matmul(adj2).matmul(us[0])
        e = left.sub(right)
        if not e.is_zero():
            a, b = next(
                (a, b)
                for a in range(4)
                for b in range(4)
                if not md.is_zero(e[a, b])
            )
            witness = {"trial": trial, "u": u, "entry": (a, b), "value": e[a, b]}
            return False, witness
    return True, None


# -- symbolic generation ---------------------------------------------------


def symbolic_tensor(mode, registry=None):
    """The generic 4x4x4 tensor: entries are the x-variables over
    PolyRing(registry, mode). The registry includes the twelve u-variables
    so coefficient extraction has somewhere to live."""
    reg = registry if registry is not None else VarRegistry.for_tensor(4, 4, 4, with_u=True)
    ring = PolyRing(reg, mode)
    entries = [None] * 64
    for i in range(4):
        for j in range(4):
            for k in range(4):
                entries[(k * 4 + i) * 4 + j] = MultiPoly.from_var_pos(
                    reg, mode, reg.x_pos(i, j, k)
                )
    return Tensor3((4, 4, 4), ring, entries, copy=False)


@dataclass(frozen=True)
class StrassenPoly:
    """One extracted coefficient: the polynomial multiplying `u_monomial`
    in entry `entry` of E. (row, col) 0-based; u_monomial in sparse
    ((position, exponent), ...) form over the joint registry."""

    entry: tuple
    u_monomial: tuple
    poly: MultiPoly


class _Budget:
    __slots__ = ("cap", "used")

    def __init__(self, cap):
        self.cap = cap
        self.used = 0

    def charge(self, poly, where):
        self.used += poly.num_terms()
        if self.used > self.cap:
            raise BudgetExceededError(
                f"term budget {self.cap} exceeded at {where} ({self.used} terms processed)"
            )


def _mat_mul_poly(a, b, budget, where):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = a[i][0].mul(b[0][j])
            for c in range(1, n):
                acc = acc.add(a[i][c].mul(b[c][j]))
            budget.charge(acc, f"{where}[{i}][{j}]")
            row.append(acc)
        out.append(row)
    return out


def _det3_poly(m):
    # Leibniz over the six permutations of three symbols
    return (
        m[0][0].mul(m[1][1].mul(m[2][2]))
        .add(m[0][1].mul(m[1][2].mul(m[2][0])))
        .add(m[0][2].mul(m[1][0].mul(m[2][1])))
        .sub(m[0][2].mul(m[1][1].mul(m[2][0])))
        .sub(m[0][0].mul(m[1][2].mul(m[2][1])))
        .sub(m[0][1].mul(m[1][0].mul(m[2][2])))
    )


def _adj4_poly(m, budget):
    # adj[i][j] = (-1)^(i+j) * det(m with row j and column i deleted)
    out = [[None] * 4 for _ in range(4)]
    for i in range(4):
        cols = [c for c in range(4) if c != i]
        for j in range(4):
            rows = [r for r in range(4) if r != j]
            sub = [[m[r][c] for c in cols] for r in rows]
            d = _det3_poly(sub)
            if (i + j) % 2:
                d = d.neg()
            budget.charge(d, f"adj[{i}][{j}]")
            out[i][j] = d
    return out


def strassen_generate(t, l, term_budget=DEFAULT_TERM_BUDGET):
    """Extract every u-coefficient of E for a symbolic tensor t.

    t must carry MultiPoly entries (see symbolic_tensor); the coefficient
    field is t.mode.mode. Returns StrassenPoly records sorted by entry and
    descending u-monomial, zero coefficients dropped. Raises
    BudgetExceededError rather than truncating."""
    ring = t.mode
    if not isinstance(ring, PolyRing):
        raise ModeError("strassen_generate needs a symbolic tensor over PolyRing")
    reg, md = ring.registry, ring.mode
    budget = _Budget(term_budget)
    xs = [s.rows for s in l_sections(t, l)]
    us = []
    for i in range(3):
        mat = [[MultiPoly.zero(reg, md) for _ in range(4)] for _ in range(4)]
        for j in range(4):
            uj = MultiPoly.from_var_pos(reg, md, reg.u_pos(j, i))
            for a in range(4):
                for b in range(4):
                    mat[a][b] = mat[a][b].add(uj.mul(xs[j][a][b]))
        us.append(mat)
    adj2 = _adj4_poly(us[1], budget)
    left = _mat_mul_poly(_mat_mul_poly(us[0], adj2, budget, "U1.adj"), us[2], budget, "U1.adj.U3")
    right = _mat_mul_poly(_mat_mul_poly(us[2], adj2, budget, "U3.adj"), us[0], budget, "U3.adj.U1")
    u_positions = [reg.u_pos(j, i) for j in range(4) for i in range(3)]
    records = []
    for a in range(4):
        for b in range(4):
            e_ab = left[a][b].sub(right[a][b])
            budget.charge(e_ab, f"E[{a}][{b}]")
            groups = e_ab.extract_coeffs(u_positions)
            for umon in mon_sorted_desc(groups):
                poly = groups[umon]
                if poly.is_zero():
                    continue
                records.append(StrassenPoly((a, b), umon, poly))
    return records


def write_strassen_polys(path, records, l, seed=None):
    """Serialize generated coefficient polynomials to the text format."""
    if not records:
        raise ValueError("nothing to write")
    md = records[0].poly.mode
    header = [
        f"degree-5 coefficient polynomials, direction l={l}, mode {md}",
        f"{len(records)} polynomials" + (f", seed {seed}" if seed is not None else ""),
    ]
    write_poly_file(path, [r.poly for r in records], header_lines=header)


# -- span dimension --------------------------------------------------------


def _dp_mul(a, b, p):
    out = {}
    for m1, v1 in a.items():
        for m2, v2 in b.items():
            key = mon_mul(m1, m2)
            prod = mulmod(v1, v2, p)
            if key in out:
                out[key] = addmod(out[key], prod, p)
            else:
                out[key] = prod
    return out


def _dp_matmul(a, b, p):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = {}
            for c in range(n):
                for key, v in _dp_mul(a[i][c], b[c][j], p).items():
                    if key in acc:
                        acc[key] = addmod(acc[key], v, p)
                    else:
                        acc[key] = v
            row.append(acc)
        out.append(row)
    return out


def _dp_det3(m, p):
    pos = (((0, 0), (1, 1), (2, 2)), ((0, 1), (1, 2), (2, 0)), ((0, 2), (1, 0), (2, 1)))
    neg = (((0, 2), (1, 1), (2, 0)), ((0, 0), (1, 2), (2, 1)), ((0, 1), (1, 0), (2, 2)))
    acc = {}
    for sign, terms in ((1, pos), (-1, neg)):
        for (r0, c0), (r1, c1), (r2, c2) in terms:
            prod = _dp_mul(_dp_mul(m[r0][c0], m[r1][c1], p), m[r2][c2], p)
            for key, v in prod.items():
                cur = acc.get(key)
                if cur is None:
                    cur = np.zeros_like(v)
                acc[key] = addmod(cur, v, p) if sign > 0 else submod(cur, v, p)
    return acc


def _dp_adj4(m, p):
    out = [[None] * 4 for _ in range(4)]
    for i in range(4):
        cols = [c for c in range(4) if c != i]
        for j in range(4):
            rows = [r for r in range(4) if r != j]
            sub = [[m[r][c] for c in cols] for r in rows]
            d = _dp_det3(sub, p)
            if (i + j) % 2:
                d = {k: submod(np.zeros_like(v), v, p) for k, v in d.items()}
            out[i][j] = d
    return out


def _sections_array(values, l):
    """values: (N, 64) tensor entries in x-registry order (k fastest).
    Returns (4, N, 4, 4): the four l-sections of every sample."""
    n = values.shape[0]
    out = np.empty((4, n, 4, 4), dtype=values.dtype)
    for s in range(4):
        for a in range(4):
            for b in range(4):
                if l == 1:
                    i, j, k = s, a, b
                elif l == 2:
                    i, j, k = a, s, b
                else:
                    i, j, k = a, b, s
                out[s, :, a, b] = values[:, (i * 4 + j) * 4 + k]
    return out


def u_coefficient_rows(values, l, p, registry=None):
    """Evaluate every u-coefficient of E at a batch of tensors.

    values: (N, 64) uint64 entries over GF(p) in x-registry order. Returns
    a list of ((entry, u_monomial), vector) pairs in deterministic order;
    the vectors stack to the evaluation matrix of the degree-5 span."""
    reg = registry if registry is not None else VarRegistry.for_tensor(4, 4, 4, with_u=True)
    sec = _sections_array(values, l)
    us = []
    for i in range(3):
        mat = [
            [
                {((reg.u_pos(j, i), 1),): sec[j, :, a, b] for j in range(4)}
                for b in range(4)
            ]
            for a in range(4)
        ]
        us.append(mat)
    adj2 = _dp_adj4(us[1], p)
    left = _dp_matmul(_dp_matmul(us[0], adj2, p), us[2], p)
    right = _dp_matmul(_dp_matmul(us[2], adj2, p), us[0], p)
    rows = []
    for a in range(4):
        for b in range(4):
            e_ab = dict(left[a][b])
            for key, v in right[a][b].items():
                cur = e_ab.get(key)
                if cur is None:
                    cur = np.zeros_like(v)
                e_ab[key] = submod(cur, v, p)
            for umon in mon_sorted_desc(e_ab):
                vec = e_ab[umon]
                if vec.any():
                    rows.append((((a, b), umon), vec))
    return rows


def _random_values(n, p, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, p, size=(n, 64), dtype=np.uint64)


def strassen_dimension(l_set, prime, sample_count=None, seed=0):
    """Dimension of the degree-5 span for the given directions, as the
    rank of the coefficient evaluation matrix at random tensors over
    GF(prime). Doubles the sample count until the rank stops growing when
    sample_count is not pinned."""
    ls = sorted(set(l_set))
    if not ls or any(l not in (1, 2, 3) for l in ls):
        raise ValueError(f"directions must be a nonempty subset of {{1,2,3}}, got {l_set}")
    prime_field(prime)  # validates primality
    reg = VarRegistry.for_tensor(4, 4, 4, with_u=True)

    def rank_at(n_samples):
        values = _random_values(n_samples, prime, seed)
        rows = []
        for l in ls:
            rows.extend(vec for _, vec in u_coefficient_rows(values, l, prime, reg))
        if sample_count is not None and sample_count < len(rows):
            warnings.warn(
                f"sample_count {sample_count} below polynomial count {len(rows)}; "
                "the reported dimension may be truncated",
                stacklevel=3,
            )
        if not rows:
            return 0, 0
        mat = np.stack(rows, axis=0)
        # eliminate the (samples x polys) orientation: fewer pivot rows
        return rank_modp_blocked(mat.T, prime), len(rows)

    if sample_count is not None:
        if sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        return rank_at(sample_count)[0]
    n = 512
    rank, _ = rank_at(n)
    while rank == n:  # saturated: rank is bounded by the poly count, so this stops
        n *= 2
        rank, _ = rank_at(n)
    return rank
