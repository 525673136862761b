"""Smoke checks for lift444: membership verdicts, witnesses, extraction."""

import json
import sys
import time

sys.path.insert(0, "src")

from border4.degree6 import eval_family, load_deg6_family
from border4.lift444 import (
    DEG6,
    SYM9,
    LiftConfig,
    corner_tensor,
    lift_eval,
    lift_generate_modp,
    membership444,
)
from border4.matrix import ExactMatrix
from border4.modes import P31, P61, RATIONAL, prime_field
from border4.tensor import Tensor3, sample_rank_r

fam6 = load_deg6_family()
gf31 = prime_field(P31)


def show(tag, rep):
    stages = " ".join(f"{s.name}:{'P' if s.passed else 'F'}" for s in rep.stages)
    print(f"{tag}: {rep.verdict}  [{stages}]")


t0 = time.time()
member = sample_rank_r((4, 4, 4), 4, seed=11, mode=gf31)
rep = membership444(member, fam6)
show("rank4 gf31", rep)
assert rep.verdict == "MEMBER" and len(rep.stages) == 9
print(f"  membership444 member time: {time.time() - t0:.2f}s")

t0 = time.time()
import random as _rnd

_g = _rnd.Random(77)
generic = Tensor3((4, 4, 4), gf31, [_g.randrange(P31) for _ in range(64)])
rep = membership444(generic, fam6)
show("generic gf31", rep)
assert rep.verdict == "NON_MEMBER"
fails = [s for s in rep.stages if not s.passed]
assert fails and all(s.witness is not None for s in fails)
print(f"  witness keys: {sorted(fails[0].witness)} … time {time.time() - t0:.2f}s")

# matmul <2,2,2>: 8 ones, known to fail the degree-5 conditions at l=3
entries = [0] * 64
for i in range(1, 3):
    for j in range(1, 3):
        for k in range(1, 3):
            a = 2 * (i - 1) + j - 1
            b = 2 * (j - 1) + k - 1
            c = 2 * (k - 1) + i - 1
            entries[(c * 4 + a) * 4 + b] = 1
mm = Tensor3((4, 4, 4), gf31, entries)
rep = membership444(mm, fam6)
show("matmul222", rep)
assert rep.verdict == "NON_MEMBER"
assert not [s for s in rep.stages if s.name == "deg5_l3"][0].passed

zero = Tensor3((4, 4, 4), gf31, [0] * 64)
rep = membership444(zero, fam6)
show("zero", rep)
assert rep.verdict == "MEMBER"

# rational path, fewer trials
cfgr = LiftConfig(trials=2, field=RATIONAL, seed=5)
member_r = sample_rank_r((4, 4, 4), 4, seed=3, mode=RATIONAL)
rep = membership444(member_r, fam6, cfgr)
show("rank4 rational", rep)
assert rep.verdict == "MEMBER"

# p61 batched guard falls back to the wide-matmul loop
cfg61 = LiftConfig(trials=4, field=prime_field(P61), seed=1)
member61 = sample_rank_r((4, 4, 4), 4, seed=8, mode=prime_field(P61))
ok, w = lift_eval(member61, 2, DEG6, fam6, cfg61)
assert ok and w is None
print("p61 deg6 lift: pass")

# JSON round trip
d = rep.to_json_dict()
json.dumps(d)
assert [s["name"] for s in d["stages"]] == [
    "deg5_l1", "deg5_l2", "deg5_l3",
    "deg6_lift_l1", "deg6_lift_l2", "deg6_lift_l3",
    "sym9_lift_l1", "sym9_lift_l2", "sym9_lift_l3",
]
print("stage order + json: ok")

# -- lift_generate_modp: deg6 ----------------------------------------------
t0 = time.time()
res = lift_generate_modp(DEG6, 3, P31, budget=30, seed=0, fam6=fam6)
print(f"deg6 gen: {len(res)} records, coverage {res.coverage}, {time.time() - t0:.2f}s")
assert len(res) == 30
assert res.coverage["exhausted"] and not res.coverage["complete"]
assert res.coverage["units_processed"] == 30 and res.coverage["frontier"] is not None
# only injective patterns emit: non-injective ones force proportional corner
# rows, and the family vanishes on that stratum
for r2 in res.records:
    pi2, rho2 = r2.pattern
    assert len(set(pi2)) == 3 and len(set(rho2)) == 3
rec = res.records[0]
assert rec.family == DEG6 and rec.l == 3 and rec.condition[0] == "poly"
# pq monomial is prod p_{i,pi(i)}^2 q_{rho(j),j}^2
pi, rho = rec.pattern
assert all(e == 2 for _, e in rec.pq_monomial) and len(rec.pq_monomial) == 6

# extraction identity at a numeric monomial (P, Q)
reg = rec.poly.registry
import random as _r

rng = _r.Random(42)
xv = [rng.randrange(P31) for _ in range(64)]
vi = [rng.randrange(1, P31) for _ in range(3)]
wj = [rng.randrange(1, P31) for _ in range(3)]
P_rows = [[0] * 4 for _ in range(4)]
Q_rows = [[0] * 4 for _ in range(4)]
for i in range(3):
    P_rows[i][pi[i]] = vi[i]
for j in range(3):
    Q_rows[rho[j]][j] = wj[j]
xs = []
t444 = Tensor3((4, 4, 4), gf31, xv)
from border4.strassen import l_sections

ys = [
    ExactMatrix(gf31, P_rows, copy=False).matmul(x).matmul(ExactMatrix(gf31, Q_rows, copy=False)).rows
    for x in l_sections(t444, 3)
]
corner = corner_tensor(ys, gf31)
direct = eval_family(fam6, corner)
# registry: 64 x vars then 16 p then 16 q
full = [0] * len(reg.keys)
for i in range(4):
    for j in range(4):
        for k in range(4):
            full[reg.x_pos(i, j, k)] = t444.get(i, j, k)
        full[reg.p_pos(i, j)] = P_rows[i][j]
        full[reg.q_pos(i, j)] = Q_rows[i][j]
pqv = 1
for pos, e in rec.pq_monomial:
    pqv = pqv * pow(full[pos], e, P31) % P31
for r2 in res.records[:10]:
    idx = r2.condition[1]
    lhs = pqv * r2.poly.eval(full) % P31
    assert lhs == direct[idx] % P31, (idx, lhs, direct[idx] % P31)
print("deg6 extraction identity at monomial (P,Q): ok")

# deg6 lifted coefficients vanish on rank<=4 samples
for s in range(4):
    samp = sample_rank_r((4, 4, 4), 4, seed=100 + s, mode=gf31)
    full = [0] * len(reg.keys)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                full[reg.x_pos(i, j, k)] = samp.get(i, j, k)
    for r2 in res.records[:10]:
        assert r2.poly.eval(full) % P31 == 0, (s, r2.condition)
print("deg6 lifted coefficients vanish on rank-4 samples: ok")

# -- lift_generate_modp: sym9 -----------------------------------------------
t0 = time.time()
res9 = lift_generate_modp(SYM9, 1, P31, budget=12, seed=0)
dt = time.time() - t0
cov9 = dict(res9.coverage)
cov9.pop("frontier")
print(f"sym9 gen: {len(res9)} records, coverage {cov9}, {dt:.2f}s")
assert res9.coverage["units_processed"] >= 12
rec9 = next(iter(res9))
assert rec9.family == SYM9 and rec9.condition[0] == "minor"
degs = {r.poly.degree() for r in list(res9)[:50]}
print(f"sym9 coefficient degrees (first 50): {sorted(degs)}")

# sym9 lifted coefficients vanish on rank<=4 samples
checked = 0
for s in range(2):
    samp = sample_rank_r((4, 4, 4), 4, seed=200 + s, mode=gf31)
    full = [0] * len(rec9.poly.registry.keys)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                full[rec9.poly.registry.x_pos(i, j, k)] = samp.get(i, j, k)
    for r2 in list(res9)[:20]:
        assert r2.poly.eval(full) % P31 == 0, (s, r2.condition)
        checked += 1
print(f"sym9 lifted coefficients vanish on rank-4 samples: ok ({checked} checks)")

print("ALL SMOKE CHECKS PASSED")
