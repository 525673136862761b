"""Lifting the 3x3x4 conditions to full 4x4x4 membership.

For a 4x4x4 tensor, direction l and matrices P, Q, the matrices P.X_{k,l}.Q
are the frontal sections of a transformed tensor; its leading 3x3x4 corner
must satisfy the degree-6 family and the degree-9 symmetrization conditions
whenever the original tensor has border rank <= 4. Since that holds
identically in the entries of P and Q, membership is tested by sampling
random P, Q (lift_eval), and the coefficient polynomials of the
(P, Q)-monomials can be extracted symbolically (lift_generate_modp).

membership444 combines the degree-5 conditions with both lifted families
over the three directions into one nine-stage verdict.
"""

import random
from dataclasses import dataclass
from itertools import product

import numpy as np

from .degree6 import eval_family, family_registry
from .matrix import ExactMatrix
from .modbatch import batch_eval, matmul_modp_wide
from .modes import ExactnessError, Mode, ModeError, P31, PrimeFieldMode, prime_field
from .poly import MultiPoly, PolyRing, VarRegistry, mon_mul
from .report import MEMBER, NON_MEMBER, MembershipReport, Stage, mode_label
from .strassen import DEFAULT_TRIALS, l_sections, strassen_eval
from .sym9 import build_sym_matrices, minor_row_sets, sym9_test, sym_rows_from_slices
from .tensor import Tensor3

DEG6 = "deg6"
SYM9 = "sym9"
FAMILIES = (DEG6, SYM9)
_RATIONAL_BOUND = 2**31 - 1
_GF31 = prime_field(P31)


@dataclass(frozen=True)
class LiftConfig:
    """Sampling policy for the lifted conditions: `trials` random (P, Q)
    pairs per (family, direction) over `field`, which must be exact."""

    trials: int = DEFAULT_TRIALS
    field: Mode = _GF31
    seed: int = 0
    families: tuple = FAMILIES

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not getattr(self.field, "is_exact", False):
            raise ExactnessError("lift sampling needs an exact mode")
        bad = [f for f in self.families if f not in FAMILIES]
        if bad or not self.families:
            raise ValueError(f"families must be a nonempty subset of {FAMILIES}")


def corner_tensor(ys, mode):
    """The leading 3x3 corner of four transformed sections as a 3x3x4
    tensor; ys holds four 4x4 row-lists."""
    entries = [None] * 36
    for k in range(4):
        for i in range(3):
            for j in range(3):
                entries[(k * 3 + i) * 3 + j] = ys[k][i][j]
    return Tensor3((3, 3, 4), mode, entries, copy=False)


def _check_444(t, cfg):
    if t.dims != (4, 4, 4):
        raise ValueError(f"need a 4x4x4 tensor, got {t.dims}")
    if t.mode != cfg.field:
        raise ModeError(f"tensor mode {t.mode} does not match config field {cfg.field}")


def _family_values_row(t):
    """3x3x4 corner entries in x-registry order (k fastest)."""
    return [t.get(i, j, k) for i in range(3) for j in range(3) for k in range(4)]


def _lift_trial_exact(xs, p_rows, q_rows, md):
    pm = ExactMatrix(md, p_rows, copy=False)
    qm = ExactMatrix(md, q_rows, copy=False)
    return [pm.matmul(x).matmul(qm).rows for x in xs]


def _lift_eval_deg6_batched(t, l, fam, cfg):
    """All trials at once over a word-sized prime field."""
    p = cfg.field.p
    xs = np.empty((4, 4, 4), dtype=np.uint64)
    for s, x in enumerate(l_sections(t, l)):
        xs[s] = [[int(v) for v in row] for row in x.rows]
    rng = np.random.default_rng([cfg.seed, l, 6])
    ps = rng.integers(0, p, size=(cfg.trials, 4, 4), dtype=np.uint64)
    qs = rng.integers(0, p, size=(cfg.trials, 4, 4), dtype=np.uint64)
    if 4 * (p - 1) * (p - 1) < 1 << 64:
        up = np.uint64(p)
        ys = np.matmul(np.matmul(ps[:, None] % up, xs[None]) % up, qs[:, None]) % up
    else:
        ys = np.empty((cfg.trials, 4, 4, 4), dtype=np.uint64)
        for n in range(cfg.trials):
            for k in range(4):
                ys[n, k] = matmul_modp_wide(matmul_modp_wide(ps[n], xs[k], p), qs[n], p)
    # corner entries, registry order: (i*3 + j)*4 + k
    values = np.empty((cfg.trials, 36), dtype=np.uint64)
    for i in range(3):
        for j in range(3):
            for k in range(4):
                values[:, (i * 3 + j) * 4 + k] = ys[:, k, i, j]
    compiled = [g.compiled() for g in fam.polys]
    out = batch_eval(compiled, values, p)
    bad = np.argwhere(out != 0)
    if bad.size == 0:
        return True, None
    trial, index = (int(v) for v in bad[0])
    p_rows = [[int(v) for v in row] for row in ps[trial]]
    q_rows = [[int(v) for v in row] for row in qs[trial]]
    # re-derive the offending value exactly before reporting it
    ys_t = _lift_trial_exact(l_sections(t, l), p_rows, q_rows, cfg.field)
    value = eval_family(fam, corner_tensor(ys_t, cfg.field))[index]
    if value != int(out[trial, index]):
        raise AssertionError("batched and exact lift evaluations disagree")
    witness = {"trial": trial, "P": p_rows, "Q": q_rows, "index": index, "value": value}
    return False, witness


def lift_eval(t, l, family, fam6, cfg):
    """Randomized test of one lifted family in direction l.

    Per trial draws P, Q over cfg.field, restricts P.X_{k,l}.Q to the
    3x3x4 corner and demands that the family vanishes there. Returns
    (True, None) or (False, witness) carrying (P, Q) and the violated
    condition."""
    _check_444(t, cfg)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if family == DEG6 and fam6 is None:
        raise ValueError("deg6 lift needs a loaded family")
    md = cfg.field
    if family == DEG6 and isinstance(md, PrimeFieldMode) and md.p.bit_length() <= 62:
        return _lift_eval_deg6_batched(t, l, fam6, cfg)
    xs = l_sections(t, l)
    for trial in range(cfg.trials):
        rng = random.Random(f"{cfg.seed}:{l}:{family}:{trial}")
        p_rows = [[md.rand(rng, _RATIONAL_BOUND) for _ in range(4)] for _ in range(4)]
        q_rows = [[md.rand(rng, _RATIONAL_BOUND) for _ in range(4)] for _ in range(4)]
        corner = corner_tensor(_lift_trial_exact(xs, p_rows, q_rows, md), md)
        if family == DEG6:
            values = eval_family(fam6, corner)
            index = next((n for n, v in enumerate(values) if not md.is_zero(v)), None)
            if index is not None:
                return False, {
                    "trial": trial,
                    "P": p_rows,
                    "Q": q_rows,
                    "index": index,
                    "value": values[index],
                }
        else:
            ok, w = sym9_test(build_sym_matrices(corner))
            if not ok:
                return False, {"trial": trial, "P": p_rows, "Q": q_rows, **w}
    return True, None


def membership444(t, fam6, cfg=None):
    """Full border-rank-<=4 membership for 4x4x4 tensors: the degree-5
    conditions and both lifted families, each over the three directions.
    All nine stages run regardless of early failures."""
    cfg = cfg if cfg is not None else LiftConfig()
    _check_444(t, cfg)
    prime = cfg.field.p if isinstance(cfg.field, PrimeFieldMode) else None
    stages = []
    for l in (1, 2, 3):
        ok, w = strassen_eval(t, l, trials=cfg.trials, seed=cfg.seed)
        stages.append(
            Stage(
                f"deg5_l{l}",
                ok,
                witness=w,
                info={"l": l, "family": "deg5", "trials": cfg.trials, "prime": prime},
            )
        )
    for family in (DEG6, SYM9):
        if family not in cfg.families:
            continue
        for l in (1, 2, 3):
            ok, w = lift_eval(t, l, family, fam6, cfg)
            stages.append(
                Stage(
                    f"{family}_lift_l{l}",
                    ok,
                    witness=w,
                    info={"l": l, "family": family, "trials": cfg.trials, "prime": prime},
                )
            )
    verdict = MEMBER if all(s.passed for s in stages) else NON_MEMBER
    return MembershipReport(verdict, "444", stages, mode_label(cfg.field), seed=cfg.seed)


# -- symbolic coefficient extraction ---------------------------------------


@dataclass(frozen=True)
class LiftPoly:
    """One lifted coefficient: the x-polynomial multiplying `pq_monomial`
    in the lift of `condition` along direction l. Patterns are the column
    choices (pi, rho) of the monomial P and Q supporting the extraction;
    condition is ("poly", index) for deg6 and ("minor", side, rows) for
    sym9, rows being the 9-row subset of the 12-row system."""

    family: str
    l: int
    pattern: tuple
    pq_monomial: tuple
    condition: tuple
    poly: MultiPoly


@dataclass(frozen=True)
class LiftGenerateResult:
    records: tuple
    coverage: dict

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def _x444_pos(reg, l, a, b, k):
    # lifted y_{i,j,k} pulls x at section k of axis l, position (a, b)
    if l == 1:
        return reg.x_pos(k, a, b)
    if l == 2:
        return reg.x_pos(a, k, b)
    return reg.x_pos(a, b, k)


def _pattern_y(reg, md, l, pi, rho):
    """Single-term y-entries for monomial P (support p_{i, pi[i]}) and
    Q (support q_{rho[j], j}): slices[k][i][j] as MultiPoly."""
    slices = []
    for k in range(4):
        rows = []
        for i in range(3):
            row = []
            for j in range(3):
                mon = mon_mul(
                    ((reg.p_pos(i, pi[i]), 1), (reg.q_pos(rho[j], j), 1)),
                    ((_x444_pos(reg, l, pi[i], rho[j], k), 1),),
                )
                row.append(MultiPoly(reg, md, {mon: md.one}, copy=False))
            rows.append(row)
        slices.append(rows)
    return slices


def _sparse_det(rows, md):
    """Determinant of a square matrix of single-term polynomials, by
    permutation recursion with column pruning. Returns a term dict."""
    n = len(rows)
    cells = []
    for row in rows:
        cells.append(
            [(c, next(iter(p.terms.items()))) for c, p in enumerate(row) if not p.is_zero()]
        )
    acc = {}
    used = [False] * n

    def rec(t, mon, coeff, inversions):
        if t == n:
            sign_coeff = coeff if inversions % 2 == 0 else md.neg(coeff)
            cur = acc.get(mon)
            new = sign_coeff if cur is None else md.add(cur, sign_coeff)
            if md.is_zero(new):
                acc.pop(mon, None)
            else:
                acc[mon] = new
            return
        for c, (m, cf) in cells[t]:
            if used[c]:
                continue
            used[c] = True
            inv = sum(1 for c2 in range(c + 1, n) if used[c2])
            rec(t + 1, mon_mul(mon, m), md.mul(coeff, cf), inversions + inv)
            used[c] = False

    rec(0, (), md.one, 0)
    return acc


def _deg6_unit(reg, md, l, pi, rho, index, g, reg334):
    """Relabel family poly `index` into the pattern's corner variables.
    The (P, Q)-monomial is the same for every term (the i- and j-contents
    are fixed), so the coefficient is the whole relabeled polynomial."""
    terms = {}
    for mon, c in g.terms.items():
        new = ()
        for pos, e in mon:
            key = reg334.keys[pos]  # ('x', i, j, k), 1-based
            i, j, k = key[1] - 1, key[2] - 1, key[3] - 1
            new = mon_mul(new, ((_x444_pos(reg, l, pi[i], rho[j], k), e),))
        cc = md.coerce(c)
        cur = terms.get(new)
        acc = cc if cur is None else md.add(cur, cc)
        if md.is_zero(acc):
            terms.pop(new, None)
        else:
            terms[new] = acc
    pq_mon = tuple(
        sorted(
            [(reg.p_pos(i, pi[i]), 2) for i in range(3)]
            + [(reg.q_pos(rho[j], j), 2) for j in range(3)]
        )
    )
    if not terms:
        return []
    poly = MultiPoly(reg, md, terms, copy=False)
    return [LiftPoly(DEG6, l, (pi, rho), pq_mon, ("poly", index), poly)]


def _sym9_unit(reg, md, rows, l, pi, rho, side, rowset, pq_positions):
    det_terms = _sparse_det([rows[r] for r in rowset], md)
    if not det_terms:
        return [], 0
    det = MultiPoly(reg, md, det_terms, copy=False)
    groups = det.extract_coeffs(pq_positions)
    out = [
        LiftPoly(SYM9, l, (pi, rho), pq_mon, ("minor", side, rowset), poly)
        for pq_mon, poly in sorted(groups.items())
        if not poly.is_zero()
    ]
    return out, len(groups)


def lift_generate_modp(family, l, prime, budget=4096, seed=0, fam6=None):
    """Symbolically extract lifted coefficient polynomials mod `prime`.

    Enumerates monomial-matrix patterns for (P, Q) in seeded order and,
    per pattern, the family's conditions in fixed order. For a
    pattern-supported (P, Q)-monomial, every contributing assignment of
    the general expansion uses pattern variables only, so each emitted
    coefficient is complete, and distinct (condition, pattern) units
    yield distinct (condition, pq_monomial) keys. `budget` bounds the
    number of (P, Q)-monomials examined; processing stops between units
    once it is reached, and the coverage metadata names the frontier unit
    that was not processed."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if family == DEG6 and fam6 is None:
        raise ValueError("deg6 lift needs a loaded family")
    if l not in (1, 2, 3):
        raise ValueError(f"direction must be 1, 2 or 3, got {l}")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    md = prime_field(prime)
    reg = VarRegistry.for_tensor(4, 4, 4, with_pq=True)
    reg334 = family_registry()
    pq_positions = [reg.p_pos(a, b) for a in range(4) for b in range(4)]
    pq_positions += [reg.q_pos(a, b) for a in range(4) for b in range(4)]
    # column-repeating patterns degenerate the corner and contribute almost
    # nothing; enumerate the injective ones first so small budgets land on
    # productive units
    rng = random.Random(seed)
    patterns = list(product(product(range(4), repeat=3), repeat=2))
    injective = [t for t in patterns if len(set(t[0])) == 3 and len(set(t[1])) == 3]
    rest = [t for t in patterns if not (len(set(t[0])) == 3 and len(set(t[1])) == 3)]
    rng.shuffle(injective)
    rng.shuffle(rest)
    patterns = injective + rest
    if family == DEG6:
        conditions = [("poly", n) for n in range(len(fam6.polys))]
    else:
        conditions = [
            ("minor", side, rowset) for side in ("L", "R") for rowset in minor_row_sets()
        ]
    records = []
    processed = 0
    units_done = 0
    frontier = None
    for pat_n, (pi, rho) in enumerate(patterns):
        rows_pair = None
        for cond in conditions:
            if processed >= budget:
                frontier = {"pattern": pat_n, "condition": cond}
                break
            if family == DEG6:
                out = _deg6_unit(reg, md, l, pi, rho, cond[1], fam6.polys[cond[1]], reg334)
                nmons = 1
            else:
                if rows_pair is None:
                    ring = PolyRing(reg, md)
                    rows_pair = sym_rows_from_slices(_pattern_y(reg, md, l, pi, rho), ring)
                rows = rows_pair[0] if cond[1] == "L" else rows_pair[1]
                out, nmons = _sym9_unit(
                    reg, md, rows, l, pi, rho, cond[1], cond[2], pq_positions
                )
            records.extend(out)
            # a unit whose coefficients all vanish still counts as one
            # examined monomial, so the budget always advances
            processed += max(1, nmons)
            units_done += 1
        if frontier is not None:
            break
    total_units = len(patterns) * len(conditions)
    coverage = {
        "monomials_processed": processed,
        "units_processed": units_done,
        "units_total": total_units,
        "records": len(records),
        "budget": budget,
        "exhausted": frontier is not None,
        "frontier": frontier,
        "complete": units_done == total_units,
    }
    return LiftGenerateResult(tuple(records), coverage)
