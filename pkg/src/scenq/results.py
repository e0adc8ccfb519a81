"""Result containers shared by all metric levels.

Per-timestep metrics produce a MetricSeries of MetricResults aligned with
the trace grid; per-scenario and per-set metrics produce ScalarResults.
Every result carries an explicit ``defined`` flag instead of NaN so that
undefined samples survive serialization and aggregation unambiguously.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import MetricError


@dataclass(frozen=True)
class MetricResult:
    """One metric sample.

    ``value`` is only meaningful when ``defined`` is True; undefined samples
    keep value 0.0 so that no NaN ever leaks into arithmetic or files.
    """

    time: float
    value: float
    unit: str
    defined: bool = True

    def __post_init__(self) -> None:
        if self.defined and not np.isfinite(self.value):
            raise MetricError("defined metric result must be finite")


@dataclass(frozen=True)
class MetricSeries:
    """Time-aligned metric samples for one actor or actor pair."""

    metric_name: str
    actor_ids: tuple[str, ...]
    unit: str
    times: np.ndarray
    values: np.ndarray
    defined: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        defined = np.asarray(self.defined, dtype=bool)
        if times.ndim != 1 or times.shape != values.shape or times.shape != defined.shape:
            raise MetricError("series arrays must be 1-D and equally long")
        if times.size == 0:
            raise MetricError("series must contain at least one sample")
        if not np.all(np.diff(times) > 0):
            raise MetricError("series times must be strictly increasing")
        if not np.all(np.isfinite(times)):
            raise MetricError("series times must be finite")
        if np.any(defined & ~np.isfinite(values)):
            raise MetricError("defined samples must be finite")
        values = values.copy()
        values[~defined] = 0.0
        for arr in (times, values, defined):
            arr.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "defined", defined)
        object.__setattr__(self, "actor_ids", tuple(self.actor_ids))
        from . import registry  # runtime import, registry pulls metric modules

        if not registry.is_registered(self.metric_name):
            raise MetricError(f"unknown metric name {self.metric_name!r}")

    def __len__(self) -> int:
        return int(self.times.size)

    def __iter__(self) -> Iterator[MetricResult]:
        for i in range(len(self)):
            yield MetricResult(
                time=float(self.times[i]),
                value=float(self.values[i]),
                unit=self.unit,
                defined=bool(self.defined[i]),
            )

    @property
    def defined_fraction(self) -> float:
        return float(np.count_nonzero(self.defined)) / len(self)

    def defined_values(self) -> np.ndarray:
        return self.values[self.defined]


@dataclass(frozen=True)
class ScalarResult:
    """One metric value per scenario or scenario set."""

    metric_name: str
    value: float
    unit: str
    defined: bool = True
    context: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.defined and not np.isfinite(self.value):
            raise MetricError("defined scalar result must be finite")
        object.__setattr__(self, "context", dict(self.context))


def undefined_scalar(metric_name: str, unit: str, reason: str, **context: str) -> ScalarResult:
    ctx = {"reason": reason}
    ctx.update(context)
    return ScalarResult(metric_name=metric_name, value=0.0, unit=unit, defined=False, context=ctx)


@dataclass(frozen=True)
class ConflictPoint:
    """Crossing of two actor paths, addressed by arc length on each."""

    position: tuple[float, float]
    ego_arc_length: float
    other_arc_length: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        if self.ego_arc_length < 0 or self.other_arc_length < 0:
            raise MetricError("conflict arc lengths must be non-negative")


@dataclass(frozen=True)
class EncroachmentZone:
    """Convex polygon where two actor paths overlap, inflated by actor size."""

    polygon: np.ndarray
    derived_from: tuple[str, str]

    def __post_init__(self) -> None:
        poly = np.asarray(self.polygon, dtype=float)
        if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
            raise MetricError("zone polygon needs at least 3 (x, y) vertices")
        if not np.all(np.isfinite(poly)):
            raise MetricError("zone polygon must be finite")
        from .geometry import polygon_area

        if polygon_area(poly) <= 0.0:
            raise MetricError("zone polygon must have positive area")
        poly = poly.copy()
        poly.flags.writeable = False
        object.__setattr__(self, "polygon", poly)
        object.__setattr__(self, "derived_from", tuple(self.derived_from))


@dataclass(frozen=True)
class OccupancyInterval:
    """Maximal interval during which an actor's footprint touches a zone."""

    actor_id: str
    entry_time: float
    exit_time: float

    def __post_init__(self) -> None:
        if not self.exit_time > self.entry_time:
            raise MetricError("occupancy interval must have positive width")

    @property
    def duration(self) -> float:
        return self.exit_time - self.entry_time


# ---------------------------------------------------------------------------
# serialization


def write_series(series: MetricSeries, path: str | Path, parameters: Mapping | None = None) -> None:
    """Write a metric series as CSV plus a JSON sidecar.

    Undefined samples get an empty value field; NaN and inf are never
    written. The sidecar ``<path>.meta.json`` records metric name, unit,
    actor ids and optional free-form parameters.
    """
    path = Path(path)
    lines = ["time_s,value,defined"]
    for i in range(len(series)):
        # builtin floats, so the repr stays shortest-round-trip plain digits
        t = float(series.times[i])
        if series.defined[i]:
            lines.append(f"{t!r},{float(series.values[i])!r},true")
        else:
            lines.append(f"{t!r},,false")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {
        "metric_name": series.metric_name,
        "unit": series.unit,
        "actor_ids": list(series.actor_ids),
        "parameters": dict(parameters) if parameters else {},
    }
    Path(str(path) + ".meta.json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )


def scalar_to_dict(scalar: ScalarResult, scenario_id: str = "") -> dict:
    return {
        "scenario_id": scenario_id,
        "metric_name": scalar.metric_name,
        "value": scalar.value if scalar.defined else None,
        "unit": scalar.unit,
        "defined": scalar.defined,
        "context": dict(scalar.context),
    }


def write_scalars(
    rows: Sequence[tuple[str, ScalarResult]], path: str | Path
) -> None:
    """Write (scenario_id, scalar) rows as JSONL, one object per line."""
    lines = [json.dumps(scalar_to_dict(s, sid)) for sid, s in rows]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
