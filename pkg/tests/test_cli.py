import json
from pathlib import Path

import pytest

from scenq import ActorTrack, Trace, load_trace_file, save_trace
from scenq.cli import main

from conftest import DATA


@pytest.fixture(scope="module")
def workdir(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def mini_scenario(workdir) -> Path:
    p = workdir / "mini_scenario.json"
    p.write_text(json.dumps({
        "scenario_id": "cli_demo",
        "description": "two slow runs for command line checks",
        "parameters": [
            {"name": "v_max", "min": 30.0, "max": 34.0, "step": 4.0, "unit": "km/h"},
        ],
        "fixed": {"t_cross": 5.0, "d_start": 16.0},
    }))
    return p


@pytest.fixture(scope="module")
def criteria_ok(workdir) -> Path:
    p = workdir / "criteria_ok.json"
    p.write_text(json.dumps({"criteria": [
        {
            "criterion_id": "stay_apart",
            "metric": "euclidean_distance",
            "params": {"actor_a": "ego", "actor_b": "pedestrian"},
            "threshold": {"comparator": ">", "value": 0.2, "unit": "m"},
        },
        {
            "criterion_id": "pet_positive",
            "metric": "pet",
            "params": {"actor_1": "ego", "actor_2": "pedestrian"},
            "threshold": {"comparator": ">", "value": 0.1, "unit": "s"},
        },
    ]}))
    return p


@pytest.fixture(scope="module")
def sim_out(workdir, mini_scenario) -> Path:
    out = workdir / "sim"
    code = main([
        "simulate",
        "--scenario", str(mini_scenario),
        "--config", str(DATA / "intersection_config.json"),
        "--out", str(out),
    ])
    assert code == 0
    return out


def test_simulate_outputs(sim_out):
    traces = sorted((sim_out / "traces").iterdir())
    assert [p.name for p in traces] == ["cli_demo_0.csv", "cli_demo_0.csv.meta.json",
                                        "cli_demo_1.csv", "cli_demo_1.csv.meta.json"]
    outcomes = [json.loads(l) for l in (sim_out / "outcomes.jsonl").read_text().splitlines()]
    assert len(outcomes) == 2
    assert all(o["end_reason"] == "route_completed" for o in outcomes)
    assert (sim_out / "scenarios.jsonl").is_file()
    manifest = json.loads((sim_out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert "traces/cli_demo_0.csv" in manifest["outputs"]
    assert manifest["tool_version"]
    assert len(manifest["config_hash"]) == 64
    # loaded traces keep their identity and conflict annotations
    trace = load_trace_file(sim_out / "traces" / "cli_demo_0.csv")
    assert trace.scenario_id == "cli_demo#0"
    assert "conflict_x" in trace.metadata


def test_evaluate_passes_and_is_deterministic(workdir, sim_out, criteria_ok):
    out1, out2 = workdir / "eval1", workdir / "eval2"
    for out in (out1, out2):
        code = main([
            "evaluate",
            "--traces", str(sim_out / "traces"),
            "--criteria", str(criteria_ok),
            "--out", str(out),
        ])
        assert code == 0
    report = json.loads((out1 / "evaluation.json").read_text())
    outcomes = {(v["criterion_id"], v["scenario_id"]): v["outcome"]
                for v in report["verdicts"]}
    assert outcomes[("stay_apart", "cli_demo#0")] == "pass"
    assert outcomes[("pet_positive", "cli_demo#1")] == "pass"
    assert len(report["cells"]) == 2
    # identical inputs, identical result bytes; only the manifest differs
    assert (out1 / "evaluation.json").read_bytes() == (out2 / "evaluation.json").read_bytes()


def test_evaluate_failing_criterion_exits_1(workdir, sim_out):
    bad = workdir / "criteria_strict.json"
    bad.write_text(json.dumps({"criteria": [{
        "criterion_id": "impossible_gap",
        "metric": "euclidean_distance",
        "params": {"actor_a": "ego", "actor_b": "pedestrian"},
        "threshold": {"comparator": ">", "value": 100.0, "unit": "m"},
    }]}))
    out = workdir / "eval_fail"
    code = main([
        "evaluate",
        "--traces", str(sim_out / "traces"),
        "--criteria", str(bad),
        "--out", str(out),
    ])
    assert code == 1
    report = json.loads((out / "evaluation.json").read_text())
    assert all(v["outcome"] == "fail" for v in report["verdicts"])


def test_evaluate_plot_data(workdir, sim_out, criteria_ok):
    out = workdir / "eval_plots"
    code = main([
        "evaluate",
        "--traces", str(sim_out / "traces" / "cli_demo_0.csv"),
        "--criteria", str(criteria_ok),
        "--out", str(out),
        "--emit-plot-data",
    ])
    assert code == 0
    plot = out / "plot_data" / "stay_apart_cli_demo_0.csv"
    assert plot.is_file()
    assert plot.read_text().splitlines()[0] == "time_s,value,defined"


def test_compare_identical_runs_ok(workdir, sim_out):
    out = workdir / "cmp_ok"
    ref = sim_out / "traces" / "cli_demo_0.csv"
    code = main([
        "compare",
        "--reference", str(ref),
        "--runs", str(ref),
        "--out", str(out),
    ])
    assert code == 0
    payload = json.loads((out / "repeatability.json").read_text())
    assert payload["all_within"] is True
    assert {e["dtw_distance"] for e in payload["entries"]} == {0.0}


def test_compare_flags_drift(workdir, sim_out):
    ref_path = sim_out / "traces" / "cli_demo_0.csv"
    trace = load_trace_file(ref_path)
    shifted_tracks = {}
    for actor in trace.actor_ids():
        t = trace.track(actor)
        shifted_tracks[actor] = ActorTrack(
            actor, t.actor_class, t.radius, t.times,
            t.xs + 0.5, t.ys, t.headings, t.speeds, t.accels,
        )
    drifted = Trace("drifted#0", trace.time_step, shifted_tracks)
    drift_path = sim_out.parent / "drifted.csv"
    save_trace(drifted, drift_path)
    out = workdir / "cmp_drift"
    code = main([
        "compare",
        "--reference", str(ref_path),
        "--runs", str(drift_path),
        "--threshold", "10.0",
        "--out", str(out),
    ])
    assert code == 1
    payload = json.loads((out / "repeatability.json").read_text())
    assert payload["all_within"] is False


def test_sweep_outputs(workdir):
    scenario = workdir / "sweep_mini.json"
    scenario.write_text(json.dumps({
        "scenario_id": "start_sweep",
        "description": "short start position sweep",
        "parameters": [
            {"name": "ego_start_x", "min": 64.0, "max": 70.0, "step": 1.0, "unit": "m"},
        ],
        "fixed": {"v_max": 58.0, "t_cross": 3.0, "d_start": 16.0},
    }))
    out = workdir / "sweep"
    code = main([
        "sweep",
        "--scenario", str(scenario),
        "--config", str(DATA / "sweep_config.json"),
        "--out", str(out),
    ])
    assert code == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == ("ego_start_x,min_euclidean_distance,min_wttc,min_gap_time,"
                        "collided,end_reason")
    assert len(lines) == 8
    findings = json.loads((out / "gap_findings.json").read_text())
    assert set(findings) == {"min_euclidean_distance", "min_wttc", "min_gap_time"}
    scalars = (out / "sweep_scalars.jsonl").read_text().splitlines()
    assert len(scalars) == 7 * 3


def test_sweep_rejects_multi_parameter_scenario(workdir):
    out = workdir / "sweep_bad"
    code = main([
        "sweep",
        "--scenario", str(DATA / "intersection_scenario.json"),
        "--config", str(DATA / "sweep_config.json"),
        "--out", str(out),
    ])
    assert code == 2


def test_report_summarizes_run_dir(workdir):
    out = workdir / "report"
    code = main(["report", "--run", str(workdir / "eval_fail"), "--out", str(out)])
    assert code == 0
    text = (out / "report.md").read_text()
    assert "## criteria" in text
    assert "impossible_gap" in text


def test_report_needs_known_artifacts(workdir, tmp_path):
    code = main(["report", "--run", str(tmp_path), "--out", str(tmp_path / "r")])
    assert code == 2


def test_missing_input_exits_2(workdir):
    code = main([
        "simulate",
        "--scenario", str(workdir / "nope.json"),
        "--config", str(DATA / "intersection_config.json"),
        "--out", str(workdir / "x"),
    ])
    assert code == 2


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
