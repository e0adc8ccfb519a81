"""Command line front end.

Subcommands: simulate, evaluate, compare, sweep, report. Every command
writes a manifest.json describing inputs, outputs and a config hash into
its output directory; timestamps live only in the manifest so repeated
runs on identical inputs produce byte-identical result files.

Exit codes: 0 all good, 1 at least one criterion failed or drift was
detected, 2 usage or input errors. SCENQ_LOG selects the log level.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__, micro, registry
from .criteria import EvaluationReport, Verdict, evaluate_suite, load_criteria
from .errors import ScenqError
from .macro import GapFinding, detect_result_gaps, repeatability_report
from .results import write_scalars, write_series
from .scenarios import load_logical_scenario, write_concrete_set
from .simulator import (
    EGO_ID,
    PED_ID,
    SimOutcome,
    load_sim_config,
    simulate_batch,
)
from .trace import TraceFormat, load_trace_file, save_trace

log = logging.getLogger("scenq")


def _setup_logging() -> None:
    level = os.environ.get("SCENQ_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _hash_files(paths: Sequence[Path]) -> str:
    digest = hashlib.sha256()
    for p in paths:
        digest.update(p.read_bytes())
    return digest.hexdigest()


def _write_manifest(
    out_dir: Path, command: str, inputs: Sequence[Path], outputs: Sequence[Path],
    started: str, config_paths: Sequence[Path],
) -> None:
    manifest = {
        "command": command,
        "inputs": [str(p) for p in inputs],
        "config_hash": _hash_files(config_paths),
        "outputs": [str(p.relative_to(out_dir)) for p in outputs],
        "tool_version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                           encoding="utf-8")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _safe_name(scenario_id: str) -> str:
    return scenario_id.replace("#", "_").replace("/", "_")


def _collect_trace_paths(raw: Sequence[str]) -> list[Path]:
    paths: list[Path] = []
    for item in raw:
        p = Path(item)
        if p.is_dir():
            found = sorted(
                q for q in p.iterdir()
                if q.suffix in (".csv", ".jsonl") and not q.name.endswith(".meta.json")
            )
            if not found:
                raise ScenqError(f"{p}: no trace files found")
            paths.extend(found)
        elif p.is_file():
            paths.append(p)
        else:
            raise ScenqError(f"{item}: no such file or directory")
    return paths


def _outcome_row(outcome: SimOutcome) -> dict:
    return {
        "scenario_id": outcome.trace.scenario_id,
        "collided": outcome.collided,
        "min_distance": outcome.min_distance,
        "completed": outcome.completed,
        "end_reason": outcome.end_reason,
        "events": dict(outcome.events),
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    started = _now()
    logical = load_logical_scenario(args.scenario)
    config = load_sim_config(args.config)
    out_dir = Path(args.out)
    trace_dir = out_dir / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)
    fmt = TraceFormat(args.format)
    suffix = ".csv" if fmt is TraceFormat.CSV else ".jsonl"

    outcomes = simulate_batch(logical, config, jobs=args.jobs)
    log.info("simulated %d scenarios", len(outcomes))

    outputs: list[Path] = []
    for outcome in outcomes:
        path = trace_dir / (_safe_name(outcome.trace.scenario_id) + suffix)
        save_trace(outcome.trace, path, fmt)
        outputs.append(path)
    from .scenarios import iter_concretize

    scen_path = out_dir / "scenarios.jsonl"
    write_concrete_set(list(iter_concretize(logical)), scen_path)
    outcome_path = out_dir / "outcomes.jsonl"
    outcome_path.write_text(
        "\n".join(json.dumps(_outcome_row(o)) for o in outcomes) + "\n", encoding="utf-8"
    )
    outputs += [scen_path, outcome_path]
    collisions = sum(o.collided for o in outcomes)
    print(f"simulated {len(outcomes)} runs, {collisions} with collisions, "
          f"traces in {trace_dir}")
    _write_manifest(out_dir, "simulate", [Path(args.scenario), Path(args.config)],
                    outputs, started, [Path(args.scenario), Path(args.config)])
    return 0


def _verdict_dict(v: Verdict) -> dict:
    worst = None
    if v.worst_result is not None:
        worst = {
            "time": v.worst_result.time,
            "value": v.worst_result.value,
            "unit": v.worst_result.unit,
            "defined": v.worst_result.defined,
        }
    return {
        "criterion_id": v.criterion_id,
        "scenario_id": v.scenario_id,
        "outcome": v.outcome,
        "score": v.score,
        "evaluated_intervals": [list(i) for i in v.evaluated_intervals],
        "worst_result": worst,
    }


def _report_dict(report: EvaluationReport) -> dict:
    return {
        "verdicts": [_verdict_dict(v) for v in report.verdicts],
        "cells": [
            {
                "perspective": c.perspective,
                "level": c.level,
                "passes": c.passes,
                "fails": c.fails,
                "scores": c.scores,
                "not_applicable": c.not_applicable,
                "pass_rate": c.pass_rate,
            }
            for c in report.cells
        ],
    }


def cmd_evaluate(args: argparse.Namespace) -> int:
    started = _now()
    trace_paths = _collect_trace_paths(args.traces)
    traces = [load_trace_file(p) for p in trace_paths]
    criteria = load_criteria(args.criteria)
    report = evaluate_suite(criteria, traces, perspective=args.perspective, level=args.level)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "evaluation.json"
    report_path.write_text(json.dumps(_report_dict(report), indent=2) + "\n", encoding="utf-8")
    outputs = [report_path]

    if args.emit_plot_data:
        plot_dir = out_dir / "plot_data"
        plot_dir.mkdir(exist_ok=True)
        for criterion in criteria:
            spec = registry.get(criterion.metric_name)
            if spec.level != registry.NANOSCOPIC:
                continue
            for trace in traces:
                series = spec.compute(trace, criterion.metric_params)
                path = plot_dir / (
                    f"{_safe_name(criterion.criterion_id)}_{_safe_name(trace.scenario_id)}.csv"
                )
                write_series(series, path, parameters=criterion.metric_params)
                outputs.append(path)

    fails = sum(v.outcome == "fail" for v in report.verdicts)
    passes = sum(v.outcome == "pass" for v in report.verdicts)
    print(f"{len(report.verdicts)} verdicts: {passes} pass, {fails} fail, "
          f"{sum(v.outcome == 'not_applicable' for v in report.verdicts)} not applicable")
    for cell in report.cells:
        rate = "n/a" if cell.pass_rate is None else f"{cell.pass_rate:.3f}"
        print(f"  [{cell.perspective} x {cell.level}] pass rate {rate}")
    _write_manifest(out_dir, "evaluate", list(trace_paths) + [Path(args.criteria)],
                    outputs, started, [Path(args.criteria)])
    return 1 if report.any_fail else 0


def cmd_compare(args: argparse.Namespace) -> int:
    started = _now()
    reference = load_trace_file(Path(args.reference))
    run_paths = _collect_trace_paths(args.runs)
    runs = [load_trace_file(p) for p in run_paths]
    actor_ids = args.actors.split(",") if args.actors else None
    report = repeatability_report(reference, runs, actor_ids=actor_ids,
                                  threshold=args.threshold)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "reference_id": report.reference_id,
        "threshold": report.threshold,
        "entries": [asdict(e) for e in report.entries],
        "all_within": report.all_within,
    }
    report_path = out_dir / "repeatability.json"
    report_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    drifting = report.drifting()
    for entry in report.entries:
        marker = "ok" if entry.within_threshold else "DRIFT"
        print(f"{entry.run_id} {entry.actor_id}: dtw {entry.dtw_distance:.6g} m "
              f"({entry.per_step:.6g} m/step) {marker}")
    _write_manifest(out_dir, "compare", [Path(args.reference)] + list(run_paths),
                    [report_path], started, [])
    return 1 if drifting else 0


def _finding_dict(finding: GapFinding) -> dict:
    return {
        "parameter": finding.parameter,
        "left_value": finding.left_value,
        "right_value": finding.right_value,
        "metric_jump": finding.metric_jump,
        "kind": finding.kind,
    }


def cmd_sweep(args: argparse.Namespace) -> int:
    started = _now()
    logical = load_logical_scenario(args.scenario)
    config = load_sim_config(args.config)
    if len(logical.parameters) != 1:
        raise ScenqError("sweep needs a logical scenario with exactly one varying parameter")
    param = logical.parameters[0]
    outcomes = simulate_batch(logical, config, jobs=args.jobs)

    from .nano import euclidean_distance, wttc

    columns = ("min_euclidean_distance", "min_wttc", "min_gap_time")
    rows: list[dict] = []
    gap_spec = registry.get("gap_time")
    for outcome in outcomes:
        trace = outcome.trace
        value = float(trace.metadata[f"binding_{param.name}"])
        dist_min = micro.aggregate(euclidean_distance(trace, EGO_ID, PED_ID), "min")
        wttc_min = micro.aggregate(wttc(trace, EGO_ID, PED_ID), "min")
        gap_series = gap_spec.compute(trace, {"ego": EGO_ID, "target": PED_ID})
        gap_min = micro.aggregate(gap_series, "min")
        rows.append({
            "value": value,
            "min_euclidean_distance": dist_min,
            "min_wttc": wttc_min,
            "min_gap_time": gap_min,
            "collided": outcome.collided,
            "end_reason": outcome.end_reason,
        })
    rows.sort(key=lambda r: r["value"])

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_lines = [param.name + "," + ",".join(columns) + ",collided,end_reason"]
    for row in rows:
        cells = [repr(float(row["value"]))]
        for col in columns:
            scalar = row[col]
            cells.append(repr(float(scalar.value)) if scalar.defined else "")
        cells.append("true" if row["collided"] else "false")
        cells.append(row["end_reason"])
        csv_lines.append(",".join(cells))
    sweep_path = out_dir / "sweep.csv"
    sweep_path.write_text("\n".join(csv_lines) + "\n", encoding="utf-8")

    findings = {}
    for col in columns:
        sweep_points = [(row["value"], row[col]) for row in rows]
        findings[col] = [
            _finding_dict(f)
            for f in detect_result_gaps(sweep_points, gap_factor=args.gap_factor,
                                        parameter=param.name)
        ]
    findings_path = out_dir / "gap_findings.json"
    findings_path.write_text(json.dumps(findings, indent=2) + "\n", encoding="utf-8")

    scalar_rows = []
    for row in rows:
        for col in columns:
            scalar_rows.append((f"{param.name}={row['value']!r}", row[col]))
    scalars_path = out_dir / "sweep_scalars.jsonl"
    write_scalars(scalar_rows, scalars_path)

    total_findings = sum(len(v) for v in findings.values())
    print(f"swept {param.name} over {len(rows)} values, "
          f"{total_findings} gap findings ({findings_path})")
    for col, items in findings.items():
        for f in items:
            jump = "defined/undefined flip" if f["metric_jump"] is None else \
                f"jump {f['metric_jump']:.6g}"
            print(f"  {col}: {param.name} in [{f['left_value']!r}, {f['right_value']!r}] {jump}")
    _write_manifest(out_dir, "sweep", [Path(args.scenario), Path(args.config)],
                    [sweep_path, findings_path, scalars_path], started,
                    [Path(args.scenario), Path(args.config)])
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    started = _now()
    run_dir = Path(args.run)
    if not run_dir.is_dir():
        raise ScenqError(f"{run_dir}: not a directory")
    sections: list[str] = ["# scenq run report", ""]
    found = False
    evaluation = run_dir / "evaluation.json"
    if evaluation.is_file():
        found = True
        data = json.loads(evaluation.read_text(encoding="utf-8"))
        sections.append("## criteria")
        sections.append("")
        sections.append("| perspective | level | pass | fail | score | n/a | pass rate |")
        sections.append("|---|---|---|---|---|---|---|")
        for cell in data["cells"]:
            rate = "n/a" if cell["pass_rate"] is None else f"{cell['pass_rate']:.3f}"
            sections.append(
                f"| {cell['perspective']} | {cell['level']} | {cell['passes']} "
                f"| {cell['fails']} | {cell['scores']} | {cell['not_applicable']} | {rate} |"
            )
        fails = [v for v in data["verdicts"] if v["outcome"] == "fail"]
        if fails:
            sections.append("")
            sections.append("### failed")
            for v in fails:
                worst = v.get("worst_result") or {}
                sections.append(
                    f"- {v['criterion_id']} on {v['scenario_id']}: worst value "
                    f"{worst.get('value')} {worst.get('unit', '')}"
                )
        sections.append("")
    repeatability = run_dir / "repeatability.json"
    if repeatability.is_file():
        found = True
        data = json.loads(repeatability.read_text(encoding="utf-8"))
        sections.append("## repeatability")
        sections.append("")
        sections.append(f"reference: {data['reference_id']}, threshold {data['threshold']} m")
        for entry in data["entries"]:
            marker = "ok" if entry["within_threshold"] else "DRIFT"
            sections.append(
                f"- {entry['run_id']} {entry['actor_id']}: {entry['dtw_distance']:.6g} m {marker}"
            )
        sections.append("")
    gap_findings = run_dir / "gap_findings.json"
    if gap_findings.is_file():
        found = True
        data = json.loads(gap_findings.read_text(encoding="utf-8"))
        sections.append("## sweep gap findings")
        sections.append("")
        for metric, items in data.items():
            if not items:
                continue
            for f in items:
                jump = "defined/undefined flip" if f["metric_jump"] is None else \
                    f"jump {f['metric_jump']:.6g}"
                sections.append(
                    f"- {metric}: [{f['left_value']!r}, {f['right_value']!r}] {jump}"
                )
        sections.append("")
    if not found:
        raise ScenqError(f"{run_dir}: no evaluation.json, repeatability.json or "
                         "gap_findings.json to report on")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.md"
    report_path.write_text("\n".join(sections), encoding="utf-8")
    print(f"report written to {report_path}")
    _write_manifest(out_dir, "report", [run_dir], [report_path], started, [])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenq",
        description="quality metrics for simulation-based driving tests",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="expand a logical scenario and simulate every run")
    p_sim.add_argument("--scenario", required=True, help="logical scenario JSON")
    p_sim.add_argument("--config", required=True, help="simulator config JSON")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p_sim.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="judge traces against a criteria suite")
    p_eval.add_argument("--traces", required=True, nargs="+",
                        help="trace files or directories")
    p_eval.add_argument("--criteria", required=True, help="criteria suite JSON")
    p_eval.add_argument("--perspective", choices=("simulation", "sut", "scenario"))
    p_eval.add_argument("--level", choices=("nanoscopic", "microscopic", "macroscopic"))
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--emit-plot-data", action="store_true",
                        help="also write per-timestep metric series as CSV")
    p_eval.set_defaults(func=cmd_evaluate)

    p_cmp = sub.add_parser("compare", help="measure repeatability against a reference trace")
    p_cmp.add_argument("--reference", required=True)
    p_cmp.add_argument("--runs", required=True, nargs="+")
    p_cmp.add_argument("--threshold", type=float, default=10.0,
                       help="dtw drift threshold in meters")
    p_cmp.add_argument("--actors", help="comma separated actor ids (default: all)")
    p_cmp.add_argument("--out", required=True)
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="simulate a 1-parameter sweep and flag result gaps")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--gap-factor", type=float, default=5.0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("report", help="summarize a run directory as markdown")
    p_rep.add_argument("--run", required=True, help="directory with command outputs")
    p_rep.add_argument("--out", required=True)
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
