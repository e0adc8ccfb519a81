"""Scenario-set metrics: trajectory repeatability, collision frequency,
grid coverage, and sweep discontinuity detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import MetricError, ScenarioError
from .scenarios import ConcreteScenario, LogicalScenario, grid_size
from .simulator import SimOutcome
from .results import ScalarResult
from .trace import ActorTrack, Trace


def dtw(track_a: ActorTrack, track_b: ActorTrack) -> float:
    """Dynamic time warping distance between two position tracks.

    Classic unconstrained formulation: monotone warp paths from the first
    to the last sample pair, per-step cost the Euclidean distance between
    the warped (x, y) positions, total cost minimized. Symmetric in its
    arguments. The matrix is filled along anti-diagonals so the quadratic
    recurrence runs in vectorized batches.
    """
    a = track_a.points
    b = track_b.points
    n, m = len(a), len(b)
    dist = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    acc = np.full((n, m), np.inf)
    acc[0, :] = np.cumsum(dist[0, :])
    acc[:, 0] = np.cumsum(dist[:, 0])
    for k in range(2, n + m - 1):
        lo = max(1, k - (m - 1))
        hi = min(n - 1, k - 1)
        if lo > hi:
            continue
        rows = np.arange(lo, hi + 1)
        cols = k - rows
        best = np.minimum(acc[rows - 1, cols], acc[rows, cols - 1])
        np.minimum(best, acc[rows - 1, cols - 1], out=best)
        acc[rows, cols] = dist[rows, cols] + best
    return float(acc[n - 1, m - 1])


@dataclass(frozen=True)
class RepeatabilityEntry:
    run_id: str
    actor_id: str
    dtw_distance: float
    per_step: float
    within_threshold: bool


@dataclass(frozen=True)
class RepeatabilityReport:
    reference_id: str
    threshold: float
    entries: tuple[RepeatabilityEntry, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def all_within(self) -> bool:
        return all(e.within_threshold for e in self.entries)

    def drifting(self) -> list[RepeatabilityEntry]:
        return [e for e in self.entries if not e.within_threshold]


def repeatability_report(
    reference: Trace,
    runs: Sequence[Trace],
    actor_ids: Sequence[str] | None = None,
    threshold: float = 10.0,
) -> RepeatabilityReport:
    """Compare repeated runs against a reference trace, per actor.

    Each entry carries the dtw distance, that distance divided by the
    reference track's sample count, and whether it stays at or below the
    threshold. The reference itself is skipped if present among the runs.
    """
    if threshold < 0:
        raise MetricError("threshold must be >= 0")
    ids = tuple(actor_ids) if actor_ids is not None else tuple(reference.actor_ids())
    for actor in ids:
        if actor not in reference.tracks:
            raise MetricError(f"actor {actor!r} missing from the reference trace")
    entries: list[RepeatabilityEntry] = []
    for run in runs:
        if run is reference:
            continue
        for actor in ids:
            if actor not in run.tracks:
                raise MetricError(
                    f"actor {actor!r} missing from run {run.scenario_id!r}"
                )
            d = dtw(reference.track(actor), run.track(actor))
            entries.append(
                RepeatabilityEntry(
                    run_id=run.scenario_id,
                    actor_id=actor,
                    dtw_distance=d,
                    per_step=d / len(reference.track(actor)),
                    within_threshold=d <= threshold,
                )
            )
    return RepeatabilityReport(
        reference_id=reference.scenario_id, threshold=threshold, entries=entries
    )


def _trace_collided(trace: Trace) -> bool:
    from .nano import common_grid
    from .trace import sample_track

    ids = trace.actor_ids()
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            track_i = trace.track(ids[i])
            track_j = trace.track(ids[j])
            t0 = max(track_i.first_time, track_j.first_time)
            t1 = min(track_i.last_time, track_j.last_time)
            if t1 < t0:
                continue
            times = common_grid(trace, (ids[i], ids[j]))
            a = sample_track(track_i, times)
            b = sample_track(track_j, times)
            d = np.hypot(b["x"] - a["x"], b["y"] - a["y"])
            if np.min(d) <= track_i.radius + track_j.radius:
                return True
    return False


def collision_probability(outcomes: Sequence[SimOutcome | Trace]) -> float:
    """Fraction of runs in which two actor discs touched or overlapped."""
    if not outcomes:
        raise MetricError("collision probability needs at least one outcome")
    hits = 0
    for outcome in outcomes:
        if isinstance(outcome, SimOutcome):
            hits += bool(outcome.collided)
        else:
            hits += _trace_collided(outcome)
    return hits / len(outcomes)


@dataclass(frozen=True)
class CoverageResult:
    overall: float
    per_parameter: Mapping[str, float]
    grid_cells: int
    executed_cells: int
    missing: tuple[dict, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_parameter", dict(self.per_parameter))
        object.__setattr__(self, "missing", tuple(self.missing))


def parameter_coverage(
    logical: LogicalScenario,
    executed: Sequence[ConcreteScenario | Mapping[str, float]],
    max_missing: int = 20,
) -> CoverageResult:
    """How much of a logical scenario's grid a set of runs touched.

    overall is the fraction of distinct grid cells hit; per_parameter the
    fraction of each parameter's values hit by any run. A binding off the
    declared grid is an error. Duplicates count once, so the result does
    not depend on run order or multiplicity.
    """
    params = logical.parameters
    counts = [p.count for p in params]
    seen: set[tuple[int, ...]] = set()
    seen_per_param: list[set[int]] = [set() for _ in params]
    for item in executed:
        bindings = item.bindings if isinstance(item, ConcreteScenario) else item
        cell = []
        for pos, p in enumerate(params):
            if p.name not in bindings:
                raise ScenarioError(f"executed scenario lacks binding {p.name!r}")
            value = float(bindings[p.name])
            if not p.contains(value):
                raise ScenarioError(
                    f"binding {p.name}={value} off the grid "
                    f"[{p.minimum}, {p.maximum}] step {p.step}"
                )
            idx = p.index_of(value)
            cell.append(idx)
            seen_per_param[pos].add(idx)
        seen.add(tuple(cell))
    total = grid_size(logical)
    missing: list[dict] = []
    if len(seen) < total and params:
        grids = [p.values() for p in params]
        for flat in range(total):
            rem = flat
            cell = [0] * len(params)
            for pos in range(len(params) - 1, -1, -1):
                rem, cell[pos] = divmod(rem, counts[pos])
            if tuple(cell) not in seen:
                missing.append({p.name: grids[pos][cell[pos]] for pos, p in enumerate(params)})
                if len(missing) >= max_missing:
                    break
    per_parameter = {
        p.name: len(seen_per_param[pos]) / p.count for pos, p in enumerate(params)
    }
    return CoverageResult(
        overall=len(seen) / total,
        per_parameter=per_parameter,
        grid_cells=total,
        executed_cells=len(seen),
        missing=missing,
    )


@dataclass(frozen=True)
class GapFinding:
    """One suspicious step between neighboring sweep points.

    kind is "jump" for an outsized change between two defined results
    (metric_jump holds the absolute change) and "definedness" when the
    metric switches between defined and undefined (metric_jump is None).
    """

    parameter: str
    left_value: float
    right_value: float
    metric_jump: float | None
    kind: str


def detect_result_gaps(
    sweep: Sequence[tuple[float, ScalarResult]],
    gap_factor: float = 5.0,
    parameter: str = "",
) -> list[GapFinding]:
    """Flag neighboring sweep points whose results differ suspiciously.

    A pair of consecutive defined results is flagged when the absolute
    change exceeds gap_factor times the median absolute change over all
    consecutive defined pairs. Any switch between defined and undefined is
    always flagged. Needs at least 3 defined points to form a baseline.
    """
    if not gap_factor > 1.0:
        raise MetricError("gap_factor must be > 1")
    values = [float(v) for v, _ in sweep]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise MetricError("sweep points must be sorted by strictly increasing parameter value")
    defined = [(v, r.value) for v, r in sweep if r.defined]
    if len(defined) < 3:
        raise MetricError("gap detection needs at least 3 defined sweep points")
    findings: list[GapFinding] = []
    for (v0, r0), (v1, r1) in zip(sweep, sweep[1:]):
        if r0.defined != r1.defined:
            findings.append(
                GapFinding(
                    parameter=parameter,
                    left_value=v0,
                    right_value=v1,
                    metric_jump=None,
                    kind="definedness",
                )
            )
    deltas = [abs(b[1] - a[1]) for a, b in zip(defined, defined[1:])]
    baseline = float(np.median(deltas))
    for (v0, x0), (v1, x1) in zip(defined, defined[1:]):
        jump = abs(x1 - x0)
        if jump > gap_factor * baseline:
            findings.append(
                GapFinding(
                    parameter=parameter,
                    left_value=v0,
                    right_value=v1,
                    metric_jump=jump,
                    kind="jump",
                )
            )
    findings.sort(key=lambda f: (f.left_value, f.kind))
    return findings
