"""Driver layer: float tolerance model, sample plans, stability audits."""

import pytest

from border4.degree6 import default_deg6_path, load_deg6_family
from border4.harness import (
    ExperimentSpec,
    ToleranceModel,
    cross_validate_334,
    float_check,
    lift_stability_audit,
    matmul_tensor,
    mode_stability_audit,
)
from border4.modes import FLOAT64, P31, P61, RATIONAL, ModeError, prime_field
from border4.report import INCONCLUSIVE, MEMBER, NON_MEMBER
from border4.sym9 import membership_routeA
from border4.tensor import (
    sample_generic,
    sample_rank_r,
    sample_special_form,
)

DATA_FILE = default_deg6_path()
needs_data = pytest.mark.skipif(
    DATA_FILE is None or not DATA_FILE.exists(),
    reason="degree-6 family data file not installed",
)


@pytest.fixture(scope="module")
def fam6():
    if DATA_FILE is None or not DATA_FILE.exists():
        return None
    return load_deg6_family()


def test_matmul_tensor_structure():
    t = matmul_tensor()
    assert t.dims == (4, 4, 4)
    assert sorted(t.entries) == [0] * 56 + [1] * 8
    for axis in range(3):
        assert t.flattening(axis).rank() == 4
    gf = prime_field(P31)
    assert matmul_tensor(gf).mode == gf


def test_tolerance_model_validation_and_banding():
    with pytest.raises(ValueError):
        ToleranceModel(epsilon=0.0)
    with pytest.raises(ValueError):
        ToleranceModel(epsilon=2.0)
    with pytest.raises(ValueError):
        ToleranceModel(band=0.5)
    tol = ToleranceModel(epsilon=1e-8, band=1e3)
    th = tol.threshold(24.0, 10.0, 4)
    assert th == pytest.approx(1e-8 * 24.0 * 10.0**4)
    assert tol.classify(0.0, th) == ("zero", False)
    assert tol.classify(th * 0.9, th) == ("zero", True)
    assert tol.classify(th * 2, th) == ("nonzero", True)
    assert tol.classify(th * 1e4, th) == ("nonzero", False)
    # norm floor: tiny tensors do not collapse the threshold
    assert tol.threshold(24.0, 0.25, 4) == pytest.approx(1e-8 * 24.0)


def test_float_check_validation(fam6):
    t = sample_rank_r((3, 3, 4), 4, seed=0)
    with pytest.raises(ModeError):
        float_check(t, "sym9")
    with pytest.raises(ValueError):
        float_check(sample_generic((4, 4, 4), seed=0).cast(FLOAT64), "sym9")
    with pytest.raises(ValueError):
        float_check(t.cast(FLOAT64), "deg5")
    with pytest.raises(ValueError):
        float_check(t.cast(FLOAT64), "deg6", fam6=None)


def test_float_check_sym9_endpoints():
    member = sample_rank_r((3, 3, 4), 4, seed=1).cast(FLOAT64)
    rep = float_check(member, "sym9")
    assert rep["verdict"] == MEMBER
    assert rep["residuals"]["checked"] == 440
    assert rep["residuals"]["nonzero"] == 0
    assert rep["residuals"]["max_ratio"] < 1e-3

    generic = sample_generic((3, 3, 4), seed=1).cast(FLOAT64)
    rep = float_check(generic, "sym9")
    assert rep["verdict"] == NON_MEMBER
    assert rep["residuals"]["max_ratio"] > 1e3


def test_float_check_boundary_sweep_hits_inconclusive():
    # Perturbing one entry of an exact member walks the residual across
    # the tolerance band; some decade must land inside it. Perturbations
    # beyond the tensor norm inflate the threshold instead (the norm term
    # is raised to the polynomial degree), so the ratio collapses again.
    base = sample_rank_r((3, 3, 4), 4, seed=2).cast(FLOAT64)
    v0 = base.get(0, 0, 0)
    verdicts = []
    ratios = []
    for k in range(-8, 5):
        t = base.with_entry(0, 0, 0, v0 + 10.0**k)
        rep = float_check(t, "sym9")
        verdicts.append(rep["verdict"])
        ratios.append(rep["residuals"]["max_ratio"])
    assert verdicts[0] == MEMBER and ratios[0] < 1e-3
    assert INCONCLUSIVE in verdicts
    # ratios grow monotonically while the perturbation stays below the norm
    assert ratios[:8] == sorted(ratios[:8])
    assert verdicts[-1] == MEMBER and ratios[-1] < 1e-3


def test_float_check_fdet_family():
    member = sample_special_form(seed=3, force_f_zero=True).cast(FLOAT64)
    assert float_check(member, "fdet")["verdict"] == MEMBER
    off = sample_special_form(seed=3).cast(FLOAT64)
    rep = float_check(off, "fdet")
    assert rep["verdict"] == NON_MEMBER
    assert rep["residuals"]["checked"] == 1


@needs_data
def test_float_check_deg6_family(fam6):
    member = sample_rank_r((3, 3, 4), 4, seed=4).cast(FLOAT64)
    rep = float_check(member, "deg6", fam6=fam6)
    assert rep["verdict"] == MEMBER
    assert rep["residuals"]["checked"] == 10
    generic = sample_generic((3, 3, 4), seed=4).cast(FLOAT64)
    assert float_check(generic, "deg6", fam6=fam6)["verdict"] == NON_MEMBER


def test_float_never_contradicts_exact():
    # float evaluation may weaken a verdict to INCONCLUSIVE, never flip it
    for seed in range(10):
        for sampler in (
            lambda s: sample_rank_r((3, 3, 4), 4, seed=s),
            lambda s: sample_generic((3, 3, 4), seed=s),
        ):
            t = sampler(seed)
            exact = membership_routeA(t).verdict
            fuzzy = float_check(t.cast(FLOAT64), "sym9")["verdict"]
            assert fuzzy in (exact, INCONCLUSIVE)


def test_experiment_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(variety="335")
    with pytest.raises(ValueError):
        ExperimentSpec(routes=("C",))
    with pytest.raises(ValueError):
        ExperimentSpec(routes=())
    with pytest.raises(ValueError):
        ExperimentSpec(variety="334", routes=("A", "FULL444"))
    with pytest.raises(ValueError):
        ExperimentSpec(rank4=-1)
    with pytest.raises(ModeError):
        ExperimentSpec(mode=FLOAT64)


def test_experiment_spec_plan_is_deterministic():
    spec = ExperimentSpec(rank4=2, generic=1, special=2, essentially234=1, seed=7)
    plan = spec.plan()
    assert plan == spec.plan()
    assert len(plan) == 2 + 1 + 3 * 2 + 1
    names = [cls for cls, _, _ in plan]
    assert names == sorted(names)
    seeds = [s for _, _, s in plan]
    assert len(set(seeds)) == len(seeds)
    # seed shifts move every derived seed
    other = ExperimentSpec(rank4=2, generic=1, special=2, essentially234=1, seed=8)
    assert not set(seeds) & {s for _, _, s in other.plan()}


@needs_data
def test_cross_validate_smoke_and_determinism():
    spec = ExperimentSpec(rank4=2, generic=2, special=1, seed=3)
    rep = cross_validate_334(spec)
    assert rep["total"] == 2 + 2 + 3
    assert rep["agreements"] == rep["total"]
    assert rep["disagreements"] == []
    assert rep["oracle"]["checked"] == 3
    assert rep["oracle"]["mismatches"] == []
    assert rep["classes"]["rank4"][MEMBER] == 4  # two routes x two tensors
    assert rep["classes"]["generic"][NON_MEMBER] == 4
    rep2 = cross_validate_334(spec)
    for r in (rep, rep2):
        r.pop("timings")
    assert rep == rep2


@needs_data
def test_cross_validate_worker_pool_matches_serial():
    spec = ExperimentSpec(rank4=2, generic=2, special=1, seed=3)
    serial = cross_validate_334(spec, workers=1)
    pooled = cross_validate_334(spec, workers=2)
    for r in (serial, pooled):
        r.pop("timings")
    assert serial == pooled


@needs_data
def test_cross_validate_empty_plan():
    rep = cross_validate_334(ExperimentSpec())
    assert rep["total"] == 0 and rep["results"] == []
    with pytest.raises(ValueError):
        cross_validate_334(ExperimentSpec(variety="444", routes=("FULL444",)))


@needs_data
def test_mode_stability_audit(fam6):
    tensors = [sample_rank_r((3, 3, 4), 4, seed=s) for s in range(3)]
    tensors += [sample_generic((3, 3, 4), seed=s) for s in range(2)]
    rep = mode_stability_audit(tensors, fam6)
    assert rep == {"checked": 5, "alarms": []}
    with pytest.raises(ValueError):
        mode_stability_audit(tensors, fam6, primes=(P31, P31))
    with pytest.raises(ModeError):
        mode_stability_audit([tensors[0].cast(prime_field(P31))], fam6)


@needs_data
def test_lift_stability_audit(fam6):
    rep = lift_stability_audit(matmul_tensor(), fam6, trials=2)
    assert rep["agree"] and rep["verdict"] == NON_MEMBER
    assert set(rep["grid"]) == {
        f"p={p},seed={s}" for p in (P31, P61) for s in (0, 1)
    }
    member = lift_stability_audit(
        sample_rank_r((4, 4, 4), 4, seed=1), fam6, trials=2
    )
    assert member["agree"] and member["verdict"] == MEMBER
    with pytest.raises(ModeError):
        lift_stability_audit(matmul_tensor(prime_field(P31)), fam6)
