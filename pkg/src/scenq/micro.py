"""Per-scenario metrics built on zone occupancy.

The encroachment zone of two actors is the intersection of the bands their
footprints sweep along their paths, taken where the paths cross. Occupancy
intervals of that zone drive post encroachment time and encroachment time.
"""

from __future__ import annotations

import numpy as np

from .errors import MetricError
from .geometry import band_intersection, first_polyline_crossing, point_at_arc
from .results import (
    EncroachmentZone,
    MetricSeries,
    OccupancyInterval,
    ScalarResult,
    undefined_scalar,
)
from .trace import Trace

AGGREGATE_OPS = ("min", "max", "mean")


def build_encroachment_zone(
    trace: Trace, actor_a: str, actor_b: str, inflation: float = 0.0
) -> EncroachmentZone:
    """Intersection of the two swept bands at the first path crossing.

    Each band is centered on the actor's traveled path with half width
    radius + inflation. Raises when the paths never cross or run parallel
    at the crossing.
    """
    if inflation < 0:
        raise MetricError("inflation must be >= 0")
    track_a = trace.track(actor_a)
    track_b = trace.track(actor_b)
    hit = first_polyline_crossing(track_a.points, track_b.points)
    if hit is None:
        raise MetricError(f"paths of {actor_a!r} and {actor_b!r} do not cross")
    (cx, cy), arc_a, arc_b = hit
    _, _, heading_a = point_at_arc(track_a.points, track_a.arc_lengths, arc_a)
    _, _, heading_b = point_at_arc(track_b.points, track_b.arc_lengths, arc_b)
    dir_a = (np.cos(heading_a), np.sin(heading_a))
    dir_b = (np.cos(heading_b), np.sin(heading_b))
    try:
        quad = band_intersection(
            (cx, cy), dir_a, dir_b, track_a.radius + inflation, track_b.radius + inflation
        )
    except ValueError as exc:
        raise MetricError(str(exc)) from None
    return EncroachmentZone(polygon=quad, derived_from=(actor_a, actor_b))


def _zone_margins(xs: np.ndarray, ys: np.ndarray, polygon: np.ndarray, radius: float) -> np.ndarray:
    """radius - signed distance to the polygon, vectorized over samples.

    Positive margin means the actor disc intersects the zone.
    """
    n_edges = len(polygon)
    edge_dist = np.full(xs.shape, np.inf)
    inside = np.zeros(xs.shape, dtype=bool)
    for i in range(n_edges):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n_edges]
        dx, dy = bx - ax, by - ay
        len2 = dx * dx + dy * dy
        if len2 > 0:
            t = np.clip(((xs - ax) * dx + (ys - ay) * dy) / len2, 0.0, 1.0)
        else:
            t = np.zeros(xs.shape)
        edge_dist = np.minimum(edge_dist, np.hypot(xs - (ax + t * dx), ys - (ay + t * dy)))
        crosses = (ay > ys) != (by > ys)
        if crosses.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                x_cross = ax + (ys - ay) / (by - ay) * dx
            inside ^= crosses & (xs < x_cross)
    signed = np.where(inside, -edge_dist, edge_dist)
    return radius - signed


def occupancy(trace: Trace, actor: str, zone: EncroachmentZone) -> list[OccupancyInterval]:
    """Maximal intervals during which the actor disc intersects the zone.

    Entry and exit times are refined by linear interpolation of the
    intersection margin between samples; intervals touching the trace
    bounds start or end there.
    """
    track = trace.track(actor)
    times = track.times
    margins = _zone_margins(track.xs, track.ys, zone.polygon, track.radius)
    occupied = margins >= 0.0
    intervals: list[OccupancyInterval] = []
    i = 0
    n = len(times)
    while i < n:
        if not occupied[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and occupied[j + 1]:
            j += 1
        if i == 0:
            entry = float(times[0])
        else:
            m0, m1 = margins[i - 1], margins[i]
            entry = float(times[i - 1] + (times[i] - times[i - 1]) * (-m0) / (m1 - m0))
        if j == n - 1:
            exit_ = float(times[-1])
        else:
            m0, m1 = margins[j], margins[j + 1]
            exit_ = float(times[j] + (times[j + 1] - times[j]) * m0 / (m0 - m1))
        if exit_ > entry:
            intervals.append(OccupancyInterval(actor_id=actor, entry_time=entry, exit_time=exit_))
        i = j + 1
    return intervals


def pet(trace: Trace, actor_1: str, actor_2: str, zone: EncroachmentZone) -> ScalarResult:
    """Post encroachment time: how long after the first actor left the zone
    the second one entered it.

    Undefined when either actor never occupies the zone, or when their
    occupancies overlap in time (that is a conflict, not a near miss; the
    context then carries conflict=overlap).
    """
    occ1 = occupancy(trace, actor_1, zone)
    occ2 = occupancy(trace, actor_2, zone)
    if not occ1 or not occ2:
        absent = actor_1 if not occ1 else actor_2
        return undefined_scalar("pet", "s", "never_occupies", actor=absent)
    first, second = (occ1[0], occ2[0])
    first_actor, second_actor = actor_1, actor_2
    if occ2[0].entry_time < occ1[0].entry_time:
        first, second = occ2[0], occ1[0]
        first_actor, second_actor = actor_2, actor_1
    if second.entry_time < first.exit_time:
        return undefined_scalar(
            "pet", "s", "simultaneous_occupancy", conflict="overlap",
            first_actor=first_actor, second_actor=second_actor,
        )
    return ScalarResult(
        metric_name="pet",
        value=second.entry_time - first.exit_time,
        unit="s",
        defined=True,
        context={"first_actor": first_actor, "second_actor": second_actor},
    )


def et(trace: Trace, actor: str, zone: EncroachmentZone) -> ScalarResult:
    """Encroachment time: duration of the actor's first zone occupancy."""
    occ = occupancy(trace, actor, zone)
    if not occ:
        return undefined_scalar("et", "s", "never_occupies", actor=actor)
    return ScalarResult(
        metric_name="et",
        value=occ[0].duration,
        unit="s",
        defined=True,
        context={"actor": actor},
    )


def aggregate(
    series: MetricSeries,
    op: str,
    periods: list[tuple[float, float]] | None = None,
) -> ScalarResult:
    """Collapse a per-timestep series to one scalar.

    op is one of min, max, mean, applied over defined samples; with periods
    given, only samples inside one of the (start, end) intervals (endpoints
    inclusive) count. Undefined when no defined sample qualifies.
    """
    if op not in AGGREGATE_OPS:
        raise MetricError(f"unknown aggregation {op!r}, expected one of {AGGREGATE_OPS}")
    mask = series.defined.copy()
    if periods is not None:
        in_period = np.zeros(len(series), dtype=bool)
        for start, end in periods:
            if end < start:
                raise MetricError("aggregation period must have start <= end")
            in_period |= (series.times >= start) & (series.times <= end)
        mask &= in_period
    name = f"{op}_{series.metric_name}"
    if not mask.any():
        return undefined_scalar(name, series.unit, "no_defined_samples")
    selected = series.values[mask]
    value = {"min": np.min, "max": np.max, "mean": np.mean}[op](selected)
    return ScalarResult(
        metric_name=name,
        value=float(value),
        unit=series.unit,
        defined=True,
        context={"samples": str(int(mask.sum())), "source_metric": series.metric_name},
    )
