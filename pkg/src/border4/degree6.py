"""The ten degree-6 conditions on 3x3x4 tensors.

The family is data, not derivation: ten degree-6 homogeneous polynomials in
the 36 entries that vanish on every tensor of border rank at most 4. The
canonical copy ships in data/degree6_family.txt (regenerable by
scripts/derive_degree6_family.py); any file in the same text format loads
through the same validation.

The structural anchor is the restriction audit: zeroing the 16 entries
x(1,3,k), x(2,3,k), x(3,1,k), x(3,2,k) must turn each family member into a
24-term polynomial equal to a scalar times x(3,3,k).x(3,3,l).f, with the ten
pairs 1 <= k <= l <= 4 each hit exactly once. Membership route B combines
the degree-9 rank conditions with vanishing of this family.
"""

import os
import random
from dataclasses import dataclass
from itertools import combinations_with_replacement
from pathlib import Path

from .modes import RATIONAL, prime_field
from .poly import (
    MultiPoly,
    NonDivisibleError,
    VarRegistry,
    parse_poly_line,
)
from .report import MEMBER, NON_MEMBER, MembershipReport, Stage, mode_label
from .specialform import f_det_poly
from .sym9 import build_sym_matrices, sym9_test
from .tensor import SPECIAL_ZERO_POSITIONS, Tensor3

DATA_ENV = "BORDER4_DEG6_FILE"
_VALIDATION_PRIME = 2_147_483_647
FAMILY_SIZE = 10
RESTRICTED_TERMS = 24


class FamilyValidationError(ValueError):
    """A candidate degree-6 family failed structural validation."""


def family_registry() -> VarRegistry:
    return VarRegistry.for_tensor(3, 3, 4)


def restriction_pairs():
    """The ten (k, l), 1 <= k <= l <= 4, in canonical file order."""
    return list(combinations_with_replacement(range(1, 5), 2))


@dataclass
class Degree6Family:
    polys: list
    source: str
    registry: VarRegistry

    def __len__(self):
        return len(self.polys)


def _registry_values(t: Tensor3):
    vals = [None] * 36
    reg = family_registry()
    for i in range(3):
        for j in range(3):
            for k in range(4):
                vals[reg.x_pos(i, j, k)] = t.get(i, j, k)
    return vals


def validate_family(polys, registry):
    if len(polys) != FAMILY_SIZE:
        raise FamilyValidationError(f"expected {FAMILY_SIZE} polynomials, got {len(polys)}")
    for n, p in enumerate(polys):
        if p.is_zero():
            raise FamilyValidationError(f"polynomial {n + 1} is zero")
        if p.degree() != 6 or not p.is_homogeneous():
            raise FamilyValidationError(
                f"polynomial {n + 1} is not homogeneous of degree 6 (degree {p.degree()})"
            )
    gp = prime_field(_VALIDATION_PRIME)
    rng = random.Random(20_240_601)
    rows = []
    for _ in range(FAMILY_SIZE + 6):
        vals = [rng.randrange(_VALIDATION_PRIME) for _ in range(len(registry))]
        rows.append([p.eval(vals) % _VALIDATION_PRIME for p in polys])
    from .matrix import ExactMatrix

    rank = ExactMatrix.from_rows(gp, rows).rank()
    if rank != FAMILY_SIZE:
        raise FamilyValidationError(
            f"family spans only {rank} dimensions at random points, want {FAMILY_SIZE}"
        )


def parse_deg6_file(text, source="<string>") -> Degree6Family:
    """Parse and validate a family from the polynomial text format. The
    evaluation inside validation runs over GF(p), so file coefficients must
    be integers (the format guarantees that)."""
    reg = family_registry()
    polys = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        p = parse_poly_line(line, reg, RATIONAL, lineno=lineno)
        if p is not None:
            polys.append(p)
    validate_family(polys, reg)
    return Degree6Family(polys=polys, source=source, registry=reg)


def default_deg6_path():
    """Resolution order: $BORDER4_DEG6_FILE, then the packaged data file."""
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    packaged = Path(__file__).parent / "data" / "degree6_family.txt"
    return packaged if packaged.exists() else None


def load_deg6_family(path=None) -> Degree6Family:
    p = Path(path) if path is not None else default_deg6_path()
    if p is None:
        raise FileNotFoundError(
            f"no degree-6 family file: pass a path, set {DATA_ENV}, or install the package data"
        )
    return parse_deg6_file(p.read_text(encoding="utf-8"), source=str(p))


def restricted_family(mode=RATIONAL):
    """The ten closed forms x(3,3,k).x(3,3,l).f in canonical pair order.
    They agree with the full family on the special stratum (up to the
    per-member scalars reported by restricted_identity_check)."""
    reg = family_registry()
    f = f_det_poly(reg, mode)
    out = []
    for k, l in restriction_pairs():
        m = MultiPoly.var(reg, mode, ("x", 3, 3, k)).mul(
            MultiPoly.var(reg, mode, ("x", 3, 3, l))
        )
        out.append(m.mul(f))
    return out


def _restriction_positions(reg):
    return [
        reg.x_pos(i, j, k) for (i, j) in SPECIAL_ZERO_POSITIONS for k in range(4)
    ]


def restricted_identity_check(family: Degree6Family) -> dict:
    """Audit of the special-stratum restriction. For each family member:
    the restriction must be nonzero with exactly 24 terms, divide exactly by
    f, and leave a single-term quotient scalar.x(3,3,k).x(3,3,l); the ten
    pairs must each occur once. Returns a report; never raises on content."""
    reg = family.registry
    zero_pos = _restriction_positions(reg)
    f = f_det_poly(reg, RATIONAL)
    x33 = {k: reg.pos[("x", 3, 3, k)] for k in range(1, 5)}
    entries = []
    problems = []
    seen = {}
    for n, p in enumerate(family.polys):
        res = p.set_zero(zero_pos)
        entry = {"index": n, "terms": res.num_terms(), "pair": None, "scalar": None}
        entries.append(entry)
        if res.is_zero():
            problems.append(f"polynomial {n + 1}: restriction is zero")
            continue
        if res.num_terms() != RESTRICTED_TERMS:
            problems.append(
                f"polynomial {n + 1}: restriction has {res.num_terms()} terms, want {RESTRICTED_TERMS}"
            )
        try:
            q = res.div_exact(f)
        except NonDivisibleError:
            problems.append(f"polynomial {n + 1}: restriction not divisible by f")
            continue
        if q.num_terms() != 1:
            problems.append(
                f"polynomial {n + 1}: quotient has {q.num_terms()} terms, want a single one"
            )
            continue
        mon, coeff = q.leading()
        pair = _pair_from_monomial(mon, x33)
        if pair is None:
            problems.append(
                f"polynomial {n + 1}: quotient monomial is not x(3,3,k).x(3,3,l)"
            )
            continue
        entry["pair"] = pair
        entry["scalar"] = coeff
        if pair in seen:
            problems.append(
                f"polynomial {n + 1}: pair {pair} already covered by polynomial {seen[pair] + 1}"
            )
        seen[pair] = n
    missing = [pq for pq in restriction_pairs() if pq not in seen]
    if missing:
        problems.append(f"pairs never covered: {missing}")
    return {"ok": not problems, "entries": entries, "problems": problems}


def _pair_from_monomial(mon, x33):
    inv = {pos: k for k, pos in x33.items()}
    if len(mon) == 1:
        pos, e = mon[0]
        if e == 2 and pos in inv:
            return (inv[pos], inv[pos])
        return None
    if len(mon) == 2:
        (p1, e1), (p2, e2) = mon
        if e1 == e2 == 1 and p1 in inv and p2 in inv:
            k, l = sorted((inv[p1], inv[p2]))
            return (k, l)
    return None


def eval_family(family: Degree6Family, t: Tensor3):
    """The ten evaluations at t, in family order, in t's scalar mode."""
    if t.dims != (3, 3, 4):
        raise ValueError(f"family evaluation needs dims (3,3,4), got {t.dims}")
    vals = _registry_values(t)
    if t.mode == RATIONAL:
        return [p.eval(vals) for p in family.polys]
    md = t.mode
    out = []
    for p in family.polys:
        q = p.map_coeffs(md, md.coerce)
        out.append(q.eval(vals))
    return out


def membership_routeB(t: Tensor3, family: Degree6Family) -> MembershipReport:
    """Degree 9 + degree 6 membership for 3x3x4 tensors."""
    system = build_sym_matrices(t)
    passed9, witness9 = sym9_test(system)
    stages = [Stage("sym9", passed9, witness=witness9)]
    if not passed9:
        return MembershipReport(NON_MEMBER, "B", stages, mode_label(t.mode))
    values = eval_family(family, t)
    md = t.mode
    bad = [(n, v) for n, v in enumerate(values) if not md.is_zero(v)]
    ok6 = not bad
    stages.append(
        Stage(
            "deg6",
            ok6,
            witness=None
            if ok6
            else {"index": bad[0][0], "value": bad[0][1], "nonzero_count": len(bad)},
        )
    )
    verdict = MEMBER if ok6 else NON_MEMBER
    return MembershipReport(verdict, "B", stages, mode_label(t.mode))
