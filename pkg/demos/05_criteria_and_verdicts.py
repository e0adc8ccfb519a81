"""Quality criteria: thresholds, scales, and application periods.

A criterion binds a metric to a comparison and optionally restricts it
to an application period derived from trace signals ("while braking",
"from the crossing start until the conflict is passed"). Verdicts are
pass, fail, or not_applicable when the period never opens.
"""

from importlib import resources

from scenq import (
    ApplicationPeriod,
    ConcreteScenario,
    QualityCriterion,
    Scale,
    StopRule,
    Threshold,
    condition,
    evaluate_suite,
    load_sim_config,
    simulate,
)

DATA = resources.files("scenq") / "data"
config = load_sim_config(str(DATA / "intersection_config.json"))

criteria = [
    # hard floor on the worst-case time to collision, but only while the
    # ego is actually moving
    QualityCriterion(
        "wttc_floor", "wttc", Threshold(">", 0.4, unit="s"),
        metric_params={"ego": "ego", "target": "pedestrian"},
        application_period=ApplicationPeriod(
            condition("speed", ">", 0.5, unit="m/s", actor="ego"),
            stop=StopRule(kind="event", event="scenario_end"),
        ),
        perspective="sut",
    ),
    # graded comfort score instead of a binary verdict
    QualityCriterion(
        "braking_comfort", "braking_time",
        Scale(((0.0, 1.0), (1.5, 0.5), (3.0, 0.0))),
        metric_params={"actor": "ego"},
        perspective="sut",
    ),
    QualityCriterion(
        "pet_margin", "pet", Threshold(">", 1.5, unit="s"),
        metric_params={"actor_1": "ego", "actor_2": "pedestrian"},
        perspective="scenario",
    ),
]

traces = []
for i, v in enumerate((24.0, 32.0, 40.0)):
    scenario = ConcreteScenario(
        scenario_id=f"speed_study#{i}", logical_id="speed_study",
        bindings={"v_max": v, "t_cross": 5.0, "d_start": 16.0}, index=i,
    )
    traces.append(simulate(scenario, config).trace)

report = evaluate_suite(criteria, traces)
for verdict in report.verdicts:
    extra = f" score {verdict.score:.2f}" if verdict.score is not None else ""
    worst = ""
    if verdict.worst_result is not None and verdict.worst_result.defined:
        worst = f" worst {verdict.worst_result.value:.3f}"
    print(f"{verdict.scenario_id:24s} {verdict.criterion_id:16s} "
          f"{verdict.outcome:>14s}{extra}{worst}")

print("\nsummary cells (perspective x resolution):")
for cell in report.cells:
    rate = "-" if cell.pass_rate is None else f"{cell.pass_rate:.0%}"
    print(f"  {cell.perspective:10s} {cell.level:12s} "
          f"pass {cell.passes} fail {cell.fails} na {cell.not_applicable} "
          f"rate {rate}")
