import pytest

from sharp3.action_store import init_state, reachable_from_A
from sharp3.group_core import GeneratorId
from sharp3.scheduler import BuildConfig, Totalize, build, coverage

R0 = GeneratorId("R", 0)


def test_zero_steps_returns_initial_state(s3):
    res = build(s3, BuildConfig(steps=0, activate={"R": 1}))
    assert res.state.n_points == 3 and res.history == []
    assert [e["kind"] for e in res.log] == ["activate"]


def test_first_step_totalizes_r0_at_p1(s3):
    res = build(s3, BuildConfig(steps=1, activate={"R": 1}))
    first = [e for e in res.log if e["status"] == "accepted" and e["kind"] != "activate"][0]
    assert first["task"] == "Totalize" and first["gen"] == "r0"
    assert first["at"] == res.state.A[0] and first["dir"] == 1
    assert res.state.n_points == 9


def test_initial_coverage_is_complete(s3):
    st = init_state(s3)
    cov = coverage(st)
    assert cov.fraction == 1.0 and cov.at_fraction == 1.0


def test_coverage_drops_after_one_extend(s3):
    res = build(s3, BuildConfig(steps=1, activate={"R": 1}))
    assert coverage(res.state).fraction < 1.0


def test_reach_is_monotone_and_matches_recompute(s3):
    counts = []

    def hook(sch, rec):
        counts.append(len(sch.reach))

    res = build(s3, BuildConfig(steps=50, word_bound=4, activate={"R": 1, "S": 1, "U": 1}), on_step=hook)
    assert counts == sorted(counts)
    assert set(res.reach) == set(reachable_from_A(res.state))


def test_point_count_formula(s3):
    res = build(s3, BuildConfig(steps=30, word_bound=4, activate={"R": 1, "S": 1, "U": 1}))
    extends = sum(1 for e in res.log if e["kind"] == "extend" and e["status"] == "accepted")
    assert res.state.n_points == 3 + 6 * extends


@pytest.mark.parametrize("seed", [1, 7])
def test_shuffled_runs_keep_invariants(s3, seed):
    cfg = BuildConfig(steps=30, word_bound=4, activate={"R": 1, "S": 1, "U": 1}, shuffle_seed=seed)
    res = build(s3, cfg)
    assert res.state.invariant_violations() == []
    assert len(res.history) == 30


def test_every_obligation_is_queued_once(s3):
    res = build(s3, BuildConfig(steps=25, word_bound=4, activate={"R": 1, "S": 1, "U": 1}))
    keys = [(e.get("task"), e.get("gen"), e.get("at"), e.get("dir"), tuple(e.get("target", ())))
            for e in res.log if e["kind"] != "activate"]
    tot = [k for k in keys if k[0] == "Totalize"]
    assert len(tot) == len(set(tot))


def test_config_round_trip_and_validation():
    cfg = BuildConfig(instance="pgl2f8", steps=5, word_bound=4, activate={"R": 2}, shuffle_seed=3)
    again = BuildConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()
    with pytest.raises(ValueError):
        BuildConfig(steps=-1)
    with pytest.raises(ValueError):
        BuildConfig(word_bound=1)


def test_totalize_task_text():
    assert str(Totalize(R0, 0, 1)) == "Totalize"
