"""Cross-validation harness, reference tensors, and the float tolerance layer.

The exact routes are the source of truth; this module compares them against
each other (cross_validate_334), against closed-form oracles on the special
stratum, and across scalar modes (mode_stability_audit, lift_stability_audit).
Floating-point evaluation is a usability layer on top: float_check classifies
residuals against a degree- and scale-aware threshold and refuses to guess
near the boundary.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .degree6 import eval_family, load_deg6_family, membership_routeB
from .lift444 import LiftConfig, membership444
from .modes import (
    FLOAT64,
    P31,
    P61,
    RATIONAL,
    Mode,
    ModeError,
    mode_from_json,
    mode_to_json,
    prime_field,
)
from .report import INCONCLUSIVE, MEMBER, NON_MEMBER, mode_label
from .specialform import special_membership
from .sym9 import membership_routeA, minor_row_sets, sym_rows_from_slices
from .tensor import (
    Tensor3,
    sample_essentially_234,
    sample_generic,
    sample_rank_r,
    sample_special_form,
    special_form_flags,
)

DEFAULT_PRIMES = (P31, P61)


def matmul_tensor(mode=RATIONAL):
    """The 2x2 matrix multiplication tensor as a 4x4x4 tensor, pair indices
    flattened by (a, b) -> 2(a-1)+b. Canonical negative control: border
    rank 7 exceeds 4, so every route must reject it."""
    entries = [0] * 64
    for i in (1, 2):
        for j in (1, 2):
            for k in (1, 2):
                a, b, c = 2 * i + j - 3, 2 * j + k - 3, 2 * k + i - 3
                entries[(c * 4 + a) * 4 + b] = 1
    t = Tensor3((4, 4, 4), RATIONAL, entries, copy=False)
    return t if mode == RATIONAL else t.cast(mode)


# -- float tolerance layer --------------------------------------------------


@dataclass(frozen=True)
class ToleranceModel:
    """Scale-aware zero test for float evaluations: a value v of a degree-d
    polynomial g at tensor T counts as zero iff
    |v| <= epsilon * ||coeffs(g)||_1 * max(1, ||T||_inf)^d. Residuals within
    a factor `band` of the threshold are flagged as borderline."""

    epsilon: float = 1e-8
    band: float = 1e3

    def __post_init__(self):
        if not (0 < self.epsilon < 1):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.band < 1:
            raise ValueError("band must be >= 1")

    def threshold(self, coeff_norm, t_norm, degree):
        return self.epsilon * coeff_norm * max(1.0, t_norm) ** degree

    def classify(self, value, threshold):
        """(label, borderline): label per the iff rule, borderline when the
        residual sits within a factor `band` of the threshold."""
        r = abs(value)
        label = "zero" if r <= threshold else "nonzero"
        return label, threshold / self.band < r <= threshold * self.band


def _support_permanent(rows):
    """Permanent of a square 0/1 support, DP over column bitmasks."""
    n = len(rows)
    masks = [sum(1 << c for c in row) for row in rows]
    counts = {0: 1}
    for m in masks:
        nxt = {}
        for used, ways in counts.items():
            free = m & ~used
            while free:
                bit = free & -free
                nxt[used | bit] = nxt.get(used | bit, 0) + ways
                free ^= bit
        counts = nxt
    return sum(w for used, w in counts.items() if bin(used).count("1") == n)


_UPPER = ((0, 1), (0, 2), (1, 2))
_PERM_CACHE = {}


def _minor_coeff_norms(row_sets):
    """Coefficient 1-norm bound per minor: the permanent of its support
    (every surviving term has coefficient +-1, so the permanent bounds the
    1-norm, with equality absent cancellation). The support of row
    (k, (a, b)) does not depend on k or the side, so minors of one row-type
    multiset share the value."""
    out = []
    for rs in row_sets:
        type_counts = [0, 0, 0]
        for r in rs:
            type_counts[r % 3] += 1
        key = tuple(sorted(type_counts))
        if key not in _PERM_CACHE:
            support = []
            for r in rs:
                a, b = _UPPER[r % 3]
                support.append([3 * a + c for c in range(3)] + [3 * b + c for c in range(3)])
            _PERM_CACHE[key] = _support_permanent(support)
        out.append(_PERM_CACHE[key])
    return out


def float_check(t, family, tol=None, fam6=None):
    """Evaluate one family at a FLOAT64 tensor and classify the residuals.

    family is "sym9" (all 440 minors), "deg6" (the ten loaded polynomials)
    or "fdet". The verdict is INCONCLUSIVE whenever any residual lies
    within a factor tol.band of its threshold; exact modes are refused."""
    if t.mode != FLOAT64:
        raise ModeError("float_check wants a FLOAT64 tensor")
    if t.dims != (3, 3, 4):
        raise ValueError(f"float_check needs dims (3,3,4), got {t.dims}")
    tol = tol if tol is not None else ToleranceModel()
    t_norm = max(abs(v) for v in t.entries)
    if family == "sym9":
        rows_l, rows_r = sym_rows_from_slices(t.slices(), FLOAT64)
        row_sets = minor_row_sets()
        norms = _minor_coeff_norms(row_sets)
        values, thresholds = [], []
        for rows in (rows_l, rows_r):
            arr = np.array(rows, dtype=np.float64)
            subs = arr[np.array(row_sets)]
            values.extend(np.linalg.det(subs).tolist())
            thresholds.extend(tol.threshold(nm, t_norm, 9) for nm in norms)
    elif family == "deg6":
        if fam6 is None:
            raise ValueError("float_check on deg6 needs a loaded family")
        values = eval_family(fam6, t)
        thresholds = [
            tol.threshold(float(sum(abs(c) for c in g.terms.values())), t_norm, 6)
            for g in fam6.polys
        ]
    elif family == "fdet":
        blocks = [
            [t.get(0, 0, k), t.get(0, 1, k), t.get(1, 0, k), t.get(1, 1, k)]
            for k in range(4)
        ]
        values = [float(np.linalg.det(np.array(blocks, dtype=np.float64)))]
        thresholds = [tol.threshold(24.0, t_norm, 4)]
    else:
        raise ValueError(f"unknown family {family!r}")
    counts = {"zero": 0, "nonzero": 0, "borderline": 0}
    max_ratio = 0.0
    for v, th in zip(values, thresholds):
        label, borderline = tol.classify(v, th)
        counts[label] += 1
        if borderline:
            counts["borderline"] += 1
        max_ratio = max(max_ratio, abs(v) / th)
    # one residual clearly past the band is a witness no borderline value
    # can retract; INCONCLUSIVE only when borderline values would decide
    if max_ratio > tol.band:
        verdict = NON_MEMBER
    elif counts["borderline"]:
        verdict = INCONCLUSIVE
    else:
        verdict = MEMBER
    return {
        "verdict": verdict,
        "family": family,
        "mode": mode_label(FLOAT64),
        "residuals": {
            "checked": len(values),
            "zero": counts["zero"],
            "nonzero": counts["nonzero"],
            "borderline": counts["borderline"],
            "max_ratio": max_ratio,
        },
    }


# -- sample plans and cross validation --------------------------------------

_CLASS_SAMPLERS = {
    "rank4": lambda seed, mode: sample_rank_r((3, 3, 4), 4, seed=seed, mode=mode),
    "generic": lambda seed, mode: sample_generic((3, 3, 4), seed=seed, mode=mode),
    "special_generic": lambda seed, mode: sample_special_form(seed=seed, mode=mode),
    "special_x33zero": lambda seed, mode: sample_special_form(
        seed=seed, x33_zero=True, mode=mode
    ),
    "special_fzero": lambda seed, mode: sample_special_form(
        seed=seed, force_f_zero=True, mode=mode
    ),
    "essentially234": lambda seed, mode: sample_essentially_234(seed=seed, mode=mode),
    "essentially224": lambda seed, mode: sample_special_form(
        seed=seed, x33_zero=True, mode=mode
    ),
}
_CLASS_BASE = {name: 10_007 * n for n, name in enumerate(sorted(_CLASS_SAMPLERS))}
ROUTES = ("A", "B", "FULL444")


@dataclass(frozen=True)
class ExperimentSpec:
    """Reproducible sample plan: this object plus the code version
    determines every sampled tensor and verdict. Counts are per class;
    `special` draws all three special-form variants."""

    variety: str = "334"
    routes: tuple = ("A", "B")
    rank4: int = 0
    generic: int = 0
    special: int = 0
    essentially234: int = 0
    essentially224: int = 0
    seed: int = 0
    mode: Mode = RATIONAL
    primes: tuple = DEFAULT_PRIMES
    deg6_file: str | None = None

    def __post_init__(self):
        if self.variety not in ("334", "444"):
            raise ValueError(f"variety must be 334 or 444, got {self.variety!r}")
        if not self.routes or any(r not in ROUTES for r in self.routes):
            raise ValueError(f"routes must be a nonempty subset of {ROUTES}")
        if self.variety == "334" and "FULL444" in self.routes:
            raise ValueError("FULL444 runs on 4x4x4 tensors only")
        if not self.mode.is_exact:
            raise ModeError("cross validation runs in exact modes")
        for name in ("rank4", "generic", "special", "essentially234", "essentially224"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} count must be >= 0")

    def plan(self):
        """(class name, index, derived seed) triples, deterministic order."""
        counts = {
            "rank4": self.rank4,
            "generic": self.generic,
            "special_generic": self.special,
            "special_x33zero": self.special,
            "special_fzero": self.special,
            "essentially234": self.essentially234,
            "essentially224": self.essentially224,
        }
        out = []
        for cls in sorted(counts):
            for i in range(counts[cls]):
                out.append((cls, i, self.seed * 1_000_003 + _CLASS_BASE[cls] + i))
        return out


def _case_record(cls, index, seed, routes, mode, fam6):
    """One independent unit of work: sample the tensor, run the routes,
    evaluate the closed-form oracle where it applies. Self-keyed by
    (class, index, seed) so assembly never depends on completion order."""
    t = _CLASS_SAMPLERS[cls](seed, mode)
    verdicts = {}
    elapsed = {}
    for route in routes:
        t0 = time.perf_counter()
        if route == "A":
            rep = membership_routeA(t)
        else:
            rep = membership_routeB(t, _case_fam6(fam6))
        elapsed[route] = time.perf_counter() - t0
        verdicts[route] = rep.verdict
    oracle = None
    if special_form_flags(t).special:
        oracle = MEMBER if special_membership(t) else NON_MEMBER
    return {
        "class": cls,
        "index": index,
        "seed": seed,
        "verdicts": verdicts,
        "elapsed": elapsed,
        "oracle": oracle,
    }


def _case_fam6(fam6):
    return fam6 if fam6 is not None else _POOL["fam6"]


_POOL = {"fam6": None, "mode": None}


def _pool_init(deg6_file, mode_json):
    _POOL["fam6"] = load_deg6_family(deg6_file)
    _POOL["mode"] = mode_from_json(*mode_json)


def _pool_case(args):
    cls, index, seed, routes = args
    return _case_record(cls, index, seed, routes, _POOL["mode"], None)


def cross_validate_334(spec, workers=1):
    """Route A (degree 9 + 16) against route B (degree 9 + 6) on the
    sampled plan; on the special stratum both are also compared with the
    closed-form oracle. Expected disagreements: none. Timings are
    wall-clock seconds per route, keyed by class.

    Cases are independent; workers > 1 fans them out to a process pool.
    Records are keyed by (class, index, seed) and assembled in plan order,
    so the report is identical whichever worker finishes first."""
    if spec.variety != "334":
        raise ValueError("cross_validate_334 wants a 334 spec")
    plan = spec.plan()
    if workers > 1 and len(plan) > 1:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_pool_init,
            initargs=(spec.deg6_file, mode_to_json(spec.mode)),
        ) as pool:
            records = list(
                pool.map(
                    _pool_case,
                    [(cls, i, seed, spec.routes) for cls, i, seed in plan],
                    chunksize=8,
                )
            )
    else:
        fam6 = load_deg6_family(spec.deg6_file)
        records = [
            _case_record(cls, i, seed, spec.routes, spec.mode, fam6)
            for cls, i, seed in plan
        ]
    records.sort(key=lambda e: (e["class"], e["index"]))
    results = []
    disagreements = []
    oracle_mismatches = []
    timings = {route: {} for route in spec.routes}
    classes = {}
    oracle_checked = 0
    for rec in records:
        cls, verdicts = rec["class"], rec["verdicts"]
        for route, dt in rec["elapsed"].items():
            timings[route][cls] = timings[route].get(cls, 0.0) + dt
        entry = {
            "class": cls,
            "index": rec["index"],
            "seed": rec["seed"],
            "verdicts": verdicts,
        }
        results.append(entry)
        if len(set(verdicts.values())) > 1:
            disagreements.append(entry)
        if rec["oracle"] is not None:
            oracle_checked += 1
            if any(v != rec["oracle"] for v in verdicts.values()):
                oracle_mismatches.append({**entry, "oracle": rec["oracle"]})
        stats = classes.setdefault(cls, {"count": 0, MEMBER: 0, NON_MEMBER: 0})
        stats["count"] += 1
        for v in verdicts.values():
            stats[v] += 1
    return {
        "variety": spec.variety,
        "routes": list(spec.routes),
        "mode": mode_label(spec.mode),
        "seed": spec.seed,
        "total": len(results),
        "agreements": len(results) - len(disagreements),
        "disagreements": disagreements,
        "oracle": {"checked": oracle_checked, "mismatches": oracle_mismatches},
        "classes": classes,
        "results": results,
        "timings": timings,
    }


# -- mode and seed stability ------------------------------------------------


def _tensor_mod(t, md):
    return Tensor3(t.dims, md, [md.coerce(v) for v in t.entries], copy=False)


def mode_stability_audit(tensors, fam6, primes=DEFAULT_PRIMES):
    """Route-B verdicts over RATIONAL and each prime field, per tensor.
    A modular false zero slipping past both primes would show up as a
    disagreement with the rational verdict; any mismatch is an alarm."""
    if len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct")
    alarms = []
    for n, t in enumerate(tensors):
        if t.mode != RATIONAL:
            raise ModeError("mode_stability_audit wants RATIONAL tensors")
        verdicts = {"rational": membership_routeB(t, fam6).verdict}
        for p in primes:
            md = prime_field(p)
            verdicts[mode_label(md)] = membership_routeB(_tensor_mod(t, md), fam6).verdict
        if len(set(verdicts.values())) > 1:
            alarms.append({"index": n, "verdicts": verdicts})
    return {"checked": len(tensors), "alarms": alarms}


def lift_stability_audit(t, fam6, seeds=(0, 1), primes=DEFAULT_PRIMES, trials=8):
    """membership444 verdict grid over seeds x primes for one integer
    tensor; disagreement anywhere is a soundness alarm."""
    if t.mode != RATIONAL:
        raise ModeError("lift_stability_audit wants a RATIONAL tensor")
    grid = {}
    for p in primes:
        md = prime_field(p)
        tm = _tensor_mod(t, md)
        for s in seeds:
            cfg = LiftConfig(trials=trials, field=md, seed=s)
            grid[(p, s)] = membership444(tm, fam6, cfg).verdict
    verdicts = set(grid.values())
    return {
        "grid": {f"p={p},seed={s}": v for (p, s), v in grid.items()},
        "agree": len(verdicts) == 1,
        "verdict": verdicts.pop() if len(verdicts) == 1 else None,
    }
