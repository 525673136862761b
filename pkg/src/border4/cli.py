"""Command line interface: sample generation, membership checks, symbolic
derivation, and verification sweeps.

Exit codes: 0 MEMBER/success, 1 NON_MEMBER (or failed verification),
2 usage or data error, 3 INCONCLUSIVE (float mode only). Reports are
deterministic for fixed seeds and inputs; timings go to the diagnostic
stream, never into report files.
"""

import argparse
import json
import sys
import time

from .degree6 import (
    FamilyValidationError,
    load_deg6_family,
    membership_routeB,
    restricted_identity_check,
)
from .harness import ExperimentSpec, cross_validate_334, float_check, matmul_tensor
from .lift444 import LiftConfig, lift_generate_modp, membership444
from .modes import FLOAT64, P31, RATIONAL, ModeError, prime_field
from .poly import format_poly
from .report import INCONCLUSIVE, MEMBER, NON_MEMBER
from .strassen import (
    DEFAULT_TERM_BUDGET,
    BudgetExceededError,
    strassen_generate,
    symbolic_tensor,
    write_strassen_polys,
)
from .sym9 import membership_routeA
from .tensor import (
    read_tensor,
    sample_essentially_234,
    sample_generic,
    sample_rank_r,
    sample_special_form,
    write_tensor,
)

_VERDICT_EXIT = {MEMBER: 0, NON_MEMBER: 1, INCONCLUSIVE: 3}

_GEN_CLASSES = ("generic", "special_generic", "special_x33zero", "special_fzero",
                "essentially234", "essentially224", "matmul222")


def _emit(payload, path):
    from .report import jsonable

    text = json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _note(msg):
    print(msg, file=sys.stderr)


def _parse_dims(text):
    parts = tuple(int(p) for p in text.split(","))
    if len(parts) != 3:
        raise ValueError(f"dims must be m,n,l, got {text!r}")
    return parts


def _build_parser():
    top = argparse.ArgumentParser(prog="border4")
    sub = top.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a sampled tensor file")
    gen.add_argument("--dims", default="3,3,4")
    gen.add_argument("--rank", type=int, default=None)
    gen.add_argument("--class", dest="cls", choices=_GEN_CLASSES, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--coeff-bound", type=int, default=9)
    gen.add_argument("--out", required=True)

    chk = sub.add_parser("check", help="membership check on a tensor file")
    chk.add_argument("tensor")
    chk.add_argument("--variety", choices=("334", "444"), default="334")
    chk.add_argument("--route", choices=("a", "b", "full"), default=None)
    chk.add_argument("--mode", choices=("exact", "modp", "float"), default="exact")
    chk.add_argument("--deg6-file", default=None)
    chk.add_argument("--prime", type=int, default=P31)
    chk.add_argument("--trials", type=int, default=32)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--report", default=None)

    der = sub.add_parser("derive", help="symbolic generation and audits")
    dsub = der.add_subparsers(dest="target", required=True)
    dst = dsub.add_parser("strassen", help="degree-5 coefficient polynomials")
    dst.add_argument("--l", type=int, choices=(1, 2, 3), required=True)
    dst.add_argument("--term-budget", type=int, default=DEFAULT_TERM_BUDGET)
    dst.add_argument("--out", required=True)
    dlf = dsub.add_parser("lift", help="lifted coefficient polynomials mod p")
    dlf.add_argument("--family", choices=("deg6", "sym9"), required=True)
    dlf.add_argument("--l", type=int, choices=(1, 2, 3), required=True)
    dlf.add_argument("--prime", type=int, default=P31)
    dlf.add_argument("--budget", type=int, default=4096)
    dlf.add_argument("--seed", type=int, default=0)
    dlf.add_argument("--deg6-file", default=None)
    dlf.add_argument("--out", default=None)
    daud = dsub.add_parser("audit", help="restricted-identity audit of the family")
    daud.add_argument("--deg6-file", default=None)
    daud.add_argument("--report", default=None)

    ver = sub.add_parser("verify", help="cross validation and acceptance sweeps")
    vsub = ver.add_subparsers(dest="target", required=True)
    vcx = vsub.add_parser("cross334", help="route A vs route B agreement sweep")
    vcx.add_argument("--rank4", type=int, default=0)
    vcx.add_argument("--generic", type=int, default=0)
    vcx.add_argument("--special", type=int, default=0)
    vcx.add_argument("--essentially234", type=int, default=0)
    vcx.add_argument("--essentially224", type=int, default=0)
    vcx.add_argument("--seed", type=int, default=0)
    vcx.add_argument("--deg6-file", default=None)
    vcx.add_argument("--workers", type=int, default=1)
    vcx.add_argument("--report", default=None)
    vac = vsub.add_parser("acceptance", help="run the acceptance criteria")
    vac.add_argument("--criteria", default=None, help="comma list, default all")
    return top


def _cmd_gen(args):
    dims = _parse_dims(args.dims)
    if args.rank is not None and args.cls is not None:
        _note("gen: --rank and --class are mutually exclusive")
        return 2
    if args.rank is not None:
        t = sample_rank_r(dims, args.rank, coeff_bound=args.coeff_bound, seed=args.seed)
    elif args.cls == "matmul222":
        if dims != (4, 4, 4):
            _note("gen: matmul222 is a 4,4,4 tensor")
            return 2
        t = matmul_tensor()
    elif args.cls in (None, "generic"):
        t = sample_generic(dims, coeff_bound=args.coeff_bound, seed=args.seed)
    else:
        if dims != (3, 3, 4):
            _note(f"gen: class {args.cls} needs dims 3,3,4")
            return 2
        if args.cls == "essentially234":
            t = sample_essentially_234(coeff_bound=args.coeff_bound, seed=args.seed)
        else:
            t = sample_special_form(
                coeff_bound=args.coeff_bound,
                seed=args.seed,
                x33_zero=args.cls in ("special_x33zero", "essentially224"),
                force_f_zero=args.cls == "special_fzero",
            )
    write_tensor(args.out, t)
    return 0


def _check_334(args, t):
    route = args.route or "b"
    if route == "full":
        _note("check: route full applies to --variety 444")
        return 2
    if args.mode == "float":
        fam6 = load_deg6_family(args.deg6_file)
        tf = t.cast(FLOAT64)
        results = [float_check(tf, "sym9")]
        if route == "b":
            results.append(float_check(tf, "deg6", fam6=fam6))
        verdicts = [r["verdict"] for r in results]
        if NON_MEMBER in verdicts:
            verdict = NON_MEMBER
        elif INCONCLUSIVE in verdicts:
            verdict = INCONCLUSIVE
        else:
            verdict = MEMBER
        report = {"verdict": verdict, "route": route.upper(), "float": results}
        return report, verdict
    tm = t.cast(prime_field(args.prime)) if args.mode == "modp" else t
    if route == "a":
        rep = membership_routeA(tm)
    else:
        rep = membership_routeB(tm, load_deg6_family(args.deg6_file))
    return rep.to_json_dict(), rep.verdict


def _check_444(args, t):
    if args.route not in (None, "full"):
        _note("check: 444 membership runs the full route")
        return 2
    if args.mode == "float":
        _note("check: float mode covers 3x3x4 families only")
        return 2
    fam6 = load_deg6_family(args.deg6_file)
    if args.mode == "modp":
        field = prime_field(args.prime)
        tm = t.cast(field)
    else:
        field = RATIONAL
        tm = t
    cfg = LiftConfig(trials=args.trials, field=field, seed=args.seed)
    rep = membership444(tm, fam6, cfg)
    return rep.to_json_dict(), rep.verdict


def _cmd_check(args):
    t = read_tensor(args.tensor)
    expected = (3, 3, 4) if args.variety == "334" else (4, 4, 4)
    if t.dims != expected:
        _note(f"check: variety {args.variety} wants dims {expected}, file has {t.dims}")
        return 2
    t0 = time.perf_counter()
    out = _check_334(args, t) if args.variety == "334" else _check_444(args, t)
    if isinstance(out, int):
        return out
    report, verdict = out
    _note(f"[time] check: {time.perf_counter() - t0:.3f}s")
    if args.report:
        _emit(report, args.report)
    else:
        _emit(report, None)
    return _VERDICT_EXIT[verdict]


def _cmd_derive(args):
    if args.target == "strassen":
        t0 = time.perf_counter()
        records = strassen_generate(symbolic_tensor(RATIONAL), args.l, args.term_budget)
        _note(f"[time] strassen_generate: {time.perf_counter() - t0:.3f}s")
        write_strassen_polys(args.out, records, args.l)
        _note(f"derive strassen: {len(records)} polynomials -> {args.out}")
        return 0
    if args.target == "lift":
        fam6 = load_deg6_family(args.deg6_file) if args.family == "deg6" else None
        t0 = time.perf_counter()
        res = lift_generate_modp(
            args.family, args.l, args.prime, budget=args.budget, seed=args.seed, fam6=fam6
        )
        _note(f"[time] lift_generate_modp: {time.perf_counter() - t0:.3f}s")
        payload = {
            "family": args.family,
            "l": args.l,
            "prime": args.prime,
            "seed": args.seed,
            "coverage": res.coverage,
            "records": [
                {
                    "pattern": rec.pattern,
                    "pq_monomial": rec.pq_monomial,
                    "condition": rec.condition,
                    "poly": format_poly(rec.poly),
                }
                for rec in res.records
            ],
        }
        _emit(payload, args.out)
        return 0
    audit = restricted_identity_check(load_deg6_family(args.deg6_file))
    _emit(audit, args.report)
    return 0 if audit["ok"] else 1


def _cmd_verify(args):
    if args.target == "cross334":
        spec = ExperimentSpec(
            variety="334",
            routes=("A", "B"),
            rank4=args.rank4,
            generic=args.generic,
            special=args.special,
            essentially234=args.essentially234,
            essentially224=args.essentially224,
            seed=args.seed,
            deg6_file=args.deg6_file,
        )
        report = cross_validate_334(spec, workers=args.workers)
        timings = report.pop("timings")
        for route, per_class in sorted(timings.items()):
            for cls, dt in sorted(per_class.items()):
                _note(f"[time] route {route} {cls}: {dt:.3f}s")
        _emit(report, args.report)
        ok = not report["disagreements"] and not report["oracle"]["mismatches"]
        return 0 if ok else 1
    from .acceptance import run_all

    selected = None
    if args.criteria:
        selected = [int(c) for c in args.criteria.split(",")]
    results = run_all(selected)
    return 0 if all(r.status in ("PASS", "SKIPPED") for r in results) else 1


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "derive":
            return _cmd_derive(args)
        return _cmd_verify(args)
    except (OSError, ValueError, KeyError, ModeError, FamilyValidationError,
            BudgetExceededError, json.JSONDecodeError) as e:
        _note(f"border4: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
