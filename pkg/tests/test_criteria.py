import json
import math

import numpy as np
import pytest

from scenq import (
    ActorClass,
    ActorTrack,
    ApplicationPeriod,
    CriterionError,
    QualityCriterion,
    Scale,
    ScalarResult,
    StopRule,
    Threshold,
    Trace,
    UnitMismatchError,
    active_intervals,
    all_of,
    always_active,
    any_of,
    comparison_margin,
    condition,
    evaluate_criterion,
    evaluate_suite,
    load_criteria,
    margin_holds,
    normalize_comparator,
    undefined_scalar,
)
from scenq.criteria import ConditionNode
from scenq.nano import euclidean_distance


def speed_track(speeds, dt=1.0, actor_id="ego", y=0.0):
    speeds = np.asarray(speeds, dtype=float)
    n = len(speeds)
    times = np.arange(n) * dt
    xs = np.concatenate([[0.0], np.cumsum(speeds[:-1] * dt)])
    return ActorTrack(
        actor_id=actor_id,
        actor_class=ActorClass.VEHICLE,
        radius=1.0,
        times=times,
        xs=xs,
        ys=np.full(n, y),
        headings=np.zeros(n),
        speeds=speeds,
        accels=np.gradient(speeds, times),
    )


def one_actor_trace(speeds, dt=1.0, metadata=None):
    track = speed_track(speeds, dt)
    return Trace("t", dt, {"ego": track}, metadata or {})


TRIANGLE = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 8.0, 6.0, 4.0, 2.0, 0.0]


def test_comparator_normalization_and_margins():
    assert normalize_comparator("==") == "="
    with pytest.raises(CriterionError):
        normalize_comparator("!=")
    assert comparison_margin("<", 3.0, 5.0) == 2.0
    assert comparison_margin(">", 3.0, 5.0) == -2.0
    assert margin_holds("<", 0.0) == False  # strict
    assert margin_holds("<=", 0.0) == True
    assert bool(margin_holds("=", comparison_margin("=", 5.0, 5.0)))
    assert not bool(margin_holds("=", comparison_margin("=", 5.0, 5.1)))


def test_condition_tree_validation():
    with pytest.raises(CriterionError):
        condition("altitude", ">", 0.0)
    with pytest.raises(CriterionError):
        condition("speed", ">", 0.0)  # no actor
    with pytest.raises(CriterionError):
        condition("distance_between", ">", 0.0, actor="a")
    with pytest.raises(CriterionError):
        condition("metric_value", ">", 0.0)  # no metric
    with pytest.raises(CriterionError):
        ConditionNode(op="all", children=(condition("time", ">=", 0.0),))
    node = all_of(
        condition("time", ">=", 0.0),
        condition("speed", ">", 1.0, actor="ego"),
    )
    assert node.referenced_actors() == {"ego"}


def test_always_active_covers_whole_trace():
    trace = one_actor_trace(TRIANGLE)
    assert active_intervals(always_active(), trace) == [(0.0, 10.0)]


def test_interval_opens_and_closes_on_condition():
    trace = one_actor_trace(TRIANGLE)
    period = ApplicationPeriod(condition("speed", ">", 5.0, actor="ego"))
    intervals = active_intervals(period, trace)
    assert len(intervals) == 1
    start, stop = intervals[0]
    # linear rise 4 -> 6 crosses 5 at 2.5; fall 6 -> 4 crosses at 7.5
    assert math.isclose(start, 2.5)
    assert math.isclose(stop, 7.5)


def test_elapsed_stop_yields_single_interval():
    trace = one_actor_trace(TRIANGLE)
    period = ApplicationPeriod(
        condition("speed", ">", 5.0, actor="ego"),
        stop=StopRule(kind="elapsed", duration=1.2),
    )
    intervals = active_intervals(period, trace)
    # the condition stays true after the stop; without a fresh rising edge
    # no second period may open
    assert intervals == [(2.5, 3.7)]


def test_elapsed_stop_reopens_after_new_edge():
    trace = one_actor_trace([0.0, 6.0, 0.0, 6.0, 0.0])
    period = ApplicationPeriod(
        condition("speed", ">", 5.0, actor="ego"),
        stop=StopRule(kind="elapsed", duration=0.1),
    )
    intervals = active_intervals(period, trace)
    assert len(intervals) == 2
    assert math.isclose(intervals[0][0], 5.0 / 6.0)
    assert math.isclose(intervals[1][0], 2.0 + 5.0 / 6.0)
    for start, stop in intervals:
        assert math.isclose(stop - start, 0.1)


def test_elapsed_stop_clamped_to_trace_end():
    trace = one_actor_trace(TRIANGLE)
    period = ApplicationPeriod(
        condition("speed", ">", 5.0, actor="ego"),
        stop=StopRule(kind="elapsed", duration=100.0),
    )
    assert active_intervals(period, trace) == [(2.5, 10.0)]


def test_event_stop_scenario_end():
    trace = one_actor_trace(TRIANGLE)
    period = ApplicationPeriod(
        condition("speed", ">", 5.0, actor="ego"),
        stop=StopRule(kind="event", event="scenario_end"),
    )
    assert active_intervals(period, trace) == [(2.5, 10.0)]


def test_event_stop_collision_from_metadata():
    trace = one_actor_trace(TRIANGLE, metadata={"event_collision": "9.0"})
    period = ApplicationPeriod(
        condition("speed", ">", 5.0, actor="ego"),
        stop=StopRule(kind="event", event="collision"),
    )
    assert active_intervals(period, trace) == [(2.5, 9.0)]


def test_event_stop_actor_passed_conflict():
    dt = 0.5
    n = 11
    times = np.arange(n) * dt
    ego = ActorTrack("ego", ActorClass.VEHICLE, 1.0, times,
                     xs=2.0 * times, ys=np.zeros(n), headings=np.zeros(n),
                     speeds=np.full(n, 2.0), accels=np.zeros(n))
    walker = ActorTrack("walker", ActorClass.PEDESTRIAN, 0.3, times,
                        xs=np.full(n, 6.0), ys=-4.0 + 1.0 * times,
                        headings=np.full(n, math.pi / 2),
                        speeds=np.full(n, 1.0), accels=np.zeros(n))
    trace = Trace("t", dt, {"ego": ego, "walker": walker})
    period = ApplicationPeriod(
        condition("time", ">=", 0.0),
        stop=StopRule(kind="event", event="actor_passed_conflict", actor="ego"),
    )
    intervals = active_intervals(period, trace)
    # ego reaches the crossing at x=6 after 3 s
    assert len(intervals) == 1
    assert math.isclose(intervals[0][1], 3.0)


def test_condition_combinators():
    trace = one_actor_trace(TRIANGLE)
    both = ApplicationPeriod(all_of(
        condition("speed", ">", 5.0, actor="ego"),
        condition("time", "<", 6.0),
    ))
    assert active_intervals(both, trace) == [(2.5, 6.0)]
    either = ApplicationPeriod(any_of(
        condition("speed", ">", 5.0, actor="ego"),
        condition("time", "<", 1.0),
    ))
    assert active_intervals(either, trace) == [(0.0, 1.0), (2.5, 7.5)]


def test_metric_value_condition():
    dt = 0.5
    n = 25
    times = np.arange(n) * dt
    ego = ActorTrack("ego", ActorClass.VEHICLE, 1.0, times,
                     xs=2.0 * times, ys=np.zeros(n), headings=np.zeros(n),
                     speeds=np.full(n, 2.0), accels=np.zeros(n))
    other = ActorTrack("other", ActorClass.VEHICLE, 1.0, times,
                       xs=np.full(n, 30.0), ys=np.zeros(n), headings=np.zeros(n),
                       speeds=np.zeros(n), accels=np.zeros(n))
    trace = Trace("t", dt, {"ego": ego, "other": other})
    period = ApplicationPeriod(condition(
        "metric_value", "<", 10.0,
        metric="euclidean_distance",
        metric_params={"actor_a": "ego", "actor_b": "other"},
    ))
    intervals = active_intervals(period, trace)
    assert len(intervals) == 1
    assert math.isclose(intervals[0][0], 10.0)  # distance 30 - 2t < 10


def test_unit_mismatch_rejected():
    trace = one_actor_trace(TRIANGLE)
    period = ApplicationPeriod(condition("speed", ">", 5.0, unit="km/h", actor="ego"))
    with pytest.raises(UnitMismatchError):
        active_intervals(period, trace)
    crit = QualityCriterion(
        criterion_id="c1",
        metric_name="pet",
        evaluation=Threshold(">", 1.5, unit="ms"),
    )
    with pytest.raises(UnitMismatchError):
        evaluate_criterion(crit, ScalarResult("pet", 3.0, "s"))


def test_scale_scoring():
    scale = Scale(breakpoints=((1.0, 0.3), (2.0, 0.7), (4.0, 1.0)))
    assert scale.score(0.5) == 0.0  # below the first breakpoint
    assert scale.score(1.0) == 0.3
    assert scale.score(3.9) == 0.7
    assert scale.score(100.0) == 1.0
    with pytest.raises(CriterionError):
        Scale(breakpoints=((2.0, 0.5), (1.0, 1.0)))
    with pytest.raises(CriterionError):
        Scale(breakpoints=())


def test_criterion_validation():
    with pytest.raises(CriterionError):
        QualityCriterion("c", "no_such_metric", Threshold(">", 0.0))
    with pytest.raises(CriterionError):
        QualityCriterion("c", "pet", Threshold(">", 0.0), perspective="observer")
    with pytest.raises(CriterionError):
        QualityCriterion("", "pet", Threshold(">", 0.0))
    crit = QualityCriterion("c", "pet", Threshold(">", 0.0))
    assert crit.level == "microscopic"


def test_scalar_threshold_verdicts():
    crit = QualityCriterion("pet_margin", "pet", Threshold(">", 1.5, unit="s"))
    assert evaluate_criterion(crit, ScalarResult("pet", 3.0, "s")).outcome == "pass"
    assert evaluate_criterion(crit, ScalarResult("pet", 1.4, "s")).outcome == "fail"
    assert evaluate_criterion(crit, ScalarResult("pet", 1.5, "s")).outcome == "fail"
    na = evaluate_criterion(crit, undefined_scalar("pet", "s", "never_occupies"))
    assert na.outcome == "not_applicable"


def test_scalar_scale_verdict():
    crit = QualityCriterion(
        "pet_score", "pet",
        Scale(breakpoints=((1.0, 0.5), (3.0, 1.0)), unit="s"),
    )
    verdict = evaluate_criterion(crit, ScalarResult("pet", 2.0, "s"))
    assert verdict.outcome == "score"
    assert verdict.score == 0.5
    assert verdict.worst_result.value == 2.0


def test_series_threshold_gated_by_period():
    dt = 0.5
    n = 21
    times = np.arange(n) * dt
    ego = ActorTrack("ego", ActorClass.VEHICLE, 1.0, times,
                     xs=2.0 * times, ys=np.zeros(n), headings=np.zeros(n),
                     speeds=np.full(n, 2.0), accels=np.zeros(n))
    other = ActorTrack("other", ActorClass.VEHICLE, 1.0, times,
                       xs=np.full(n, 15.0), ys=np.zeros(n), headings=np.zeros(n),
                       speeds=np.zeros(n), accels=np.zeros(n))
    trace = Trace("t", dt, {"ego": ego, "other": other})
    series = euclidean_distance(trace, "ego", "other")
    # over the whole trace the distance reaches 0; gated to the first
    # two seconds it stays above 10
    gated = QualityCriterion(
        "keep_apart", "euclidean_distance", Threshold(">", 10.0, unit="m"),
        application_period=ApplicationPeriod(
            condition("time", ">=", 0.0),
            stop=StopRule(kind="elapsed", duration=2.0),
        ),
        metric_params={"actor_a": "ego", "actor_b": "other"},
    )
    verdict = evaluate_criterion(gated, series, trace)
    assert verdict.outcome == "pass"
    assert verdict.evaluated_intervals == ((0.0, 2.0),)
    whole = QualityCriterion(
        "keep_apart_all", "euclidean_distance", Threshold(">", 10.0, unit="m"),
        metric_params={"actor_a": "ego", "actor_b": "other"},
    )
    failing = evaluate_criterion(whole, series, trace)
    assert failing.outcome == "fail"
    assert failing.worst_result.value == min(series.values)
    assert failing.worst_result.time == 7.5  # ego center reaches the other


def test_series_requires_trace_and_matching_metric():
    trace = one_actor_trace(TRIANGLE)
    series = euclidean_distance(
        Trace("t2", 1.0, {
            "a": speed_track(TRIANGLE, actor_id="a"),
            "b": speed_track(TRIANGLE, actor_id="b", y=5.0),
        }), "a", "b")
    crit = QualityCriterion("c", "euclidean_distance", Threshold(">", 0.0, unit="m"),
                            metric_params={"actor_a": "a", "actor_b": "b"})
    with pytest.raises(CriterionError):
        evaluate_criterion(crit, series)
    wrong = QualityCriterion("c", "headway", Threshold(">", 0.0, unit="m"),
                             metric_params={"ego": "a", "target": "b"})
    with pytest.raises(CriterionError):
        evaluate_criterion(wrong, series, trace)


def test_vacuous_period_is_not_applicable_never_pass():
    trace = one_actor_trace(TRIANGLE)
    crit = QualityCriterion(
        "never_active", "pet", Threshold(">", 0.0, unit="s"),
        application_period=ApplicationPeriod(
            condition("speed", ">", 999.0, actor="ego"),
        ),
    )
    verdict = evaluate_criterion(crit, ScalarResult("pet", 5.0, "s"), trace)
    assert verdict.outcome == "not_applicable"


def test_interval_edges_stable_under_resampling():
    from scenq import resample

    trace = one_actor_trace(TRIANGLE, metadata={})
    fine = resample(trace, 0.2)
    period = ApplicationPeriod(condition("speed", ">", 5.0, actor="ego"))
    coarse_iv = active_intervals(period, trace)
    fine_iv = active_intervals(period, fine)
    assert len(coarse_iv) == len(fine_iv) == 1
    assert abs(coarse_iv[0][0] - fine_iv[0][0]) <= 1.0
    assert abs(coarse_iv[0][1] - fine_iv[0][1]) <= 1.0
    # on piecewise linear speed the interpolated edges agree exactly
    assert math.isclose(coarse_iv[0][0], fine_iv[0][0])
    assert math.isclose(coarse_iv[0][1], fine_iv[0][1])


def test_evaluate_suite_cells_and_filters():
    dt = 0.5
    n = 21
    times = np.arange(n) * dt
    traces = []
    for sid, x_other in (("run#0", 40.0), ("run#1", 15.0)):
        ego = ActorTrack("ego", ActorClass.VEHICLE, 1.0, times,
                         xs=2.0 * times, ys=np.zeros(n), headings=np.zeros(n),
                         speeds=np.full(n, 2.0), accels=np.zeros(n))
        other = ActorTrack("other", ActorClass.VEHICLE, 1.0, times,
                           xs=np.full(n, x_other), ys=np.zeros(n),
                           headings=np.zeros(n), speeds=np.zeros(n),
                           accels=np.zeros(n))
        traces.append(Trace(sid, dt, {"ego": ego, "other": other}))
    criteria = [
        QualityCriterion("apart", "euclidean_distance", Threshold(">", 10.0, unit="m"),
                         metric_params={"actor_a": "ego", "actor_b": "other"},
                         perspective="sut"),
        QualityCriterion("no_hits", "collision_probability", Threshold("<=", 0.0, unit="1"),
                         perspective="scenario"),
    ]
    report = evaluate_suite(criteria, traces)
    assert len(report.verdicts) == 3  # 2 per-trace + 1 set-level
    outcomes = {(v.criterion_id, v.scenario_id): v.outcome for v in report.verdicts}
    assert outcomes[("apart", "run#0")] == "pass"
    assert outcomes[("apart", "run#1")] == "fail"
    assert outcomes[("no_hits", "scenario_set")] == "fail"  # run#1 reaches contact
    assert report.any_fail
    cell = {(c.perspective, c.level): c for c in report.cells}
    assert cell[("sut", "nanoscopic")].passes == 1
    assert cell[("sut", "nanoscopic")].fails == 1
    assert cell[("sut", "nanoscopic")].pass_rate == 0.5
    assert cell[("scenario", "macroscopic")].fails == 1

    only_sut = evaluate_suite(criteria, traces, perspective="sut")
    assert {v.criterion_id for v in only_sut.verdicts} == {"apart"}
    only_macro = evaluate_suite(criteria, traces, level="macroscopic")
    assert {v.criterion_id for v in only_macro.verdicts} == {"no_hits"}
    with pytest.raises(CriterionError):
        evaluate_suite(criteria, [])


def test_load_criteria_file(tmp_path):
    suite = {
        "criteria": [
            {
                "criterion_id": "pet_margin",
                "metric": "pet",
                "params": {"actor_1": "ego", "actor_2": "pedestrian"},
                "threshold": {"comparator": ">", "value": 1.5, "unit": "s"},
                "perspective": "sut",
            },
            {
                "criterion_id": "ttc_floor",
                "metric": "ttc",
                "params": {"ego": "ego", "target": "pedestrian"},
                "threshold": {"comparator": ">=", "value": 1.0, "unit": "s"},
                "application_period": {
                    "start_condition": {
                        "signal": "speed", "actor": "ego",
                        "comparator": ">", "bound": 0.5, "unit": "m/s",
                    },
                    "stop": {"kind": "event", "event": "scenario_end"},
                },
            },
            {
                "criterion_id": "drift_score",
                "metric": "dtw",
                "params": {},
                "scale": {"breakpoints": [[0.0, 1.0], [5.0, 0.5]], "unit": "m"},
                "perspective": "simulation",
            },
        ]
    }
    p = tmp_path / "suite.json"
    p.write_text(json.dumps(suite))
    criteria = load_criteria(p)
    assert [c.criterion_id for c in criteria] == ["pet_margin", "ttc_floor", "drift_score"]
    assert criteria[0].evaluation == Threshold(">", 1.5, unit="s")
    assert criteria[1].application_period.stop.kind == "event"
    assert isinstance(criteria[2].evaluation, Scale)
    assert criteria[2].perspective == "simulation"


def test_load_criteria_rejects_bad_suites(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"criteria": []}))
    with pytest.raises(CriterionError):
        load_criteria(p)
    p.write_text(json.dumps({"criteria": [{"criterion_id": "x", "metric": "pet"}]}))
    with pytest.raises(CriterionError):
        load_criteria(p)
    p.write_text(json.dumps({"criteria": [{
        "criterion_id": "x", "metric": "pet",
        "threshold": {"comparator": ">", "value": 0.0},
        "scale": {"breakpoints": [[0.0, 1.0]]},
    }]}))
    with pytest.raises(CriterionError):
        load_criteria(p)
    p.write_text("not json")
    with pytest.raises(CriterionError):
        load_criteria(p)


def test_negating_comparator_flips_scalar_verdict():
    opposites = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
    rng = np.random.default_rng(11)
    for _ in range(100):
        value = float(rng.uniform(-10, 10))
        bound = float(rng.uniform(-10, 10))
        if abs(value - bound) < 1e-6:
            continue
        for comp, anti in opposites.items():
            a = evaluate_criterion(
                QualityCriterion("c", "pet", Threshold(comp, bound)),
                ScalarResult("pet", value, "s"),
            )
            b = evaluate_criterion(
                QualityCriterion("c", "pet", Threshold(anti, bound)),
                ScalarResult("pet", value, "s"),
            )
            assert {a.outcome, b.outcome} == {"pass", "fail"}
            assert a.outcome != b.outcome
