"""Per-timestep metrics over actor traces.

Every function returns a MetricSeries aligned with the trace grid over the
time span the involved actors share. Samples where a metric has no meaning
(no closing motion, actor past the conflict, no braking) are marked
undefined rather than clamped or extrapolated.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import MetricError
from .geometry import point_polyline_distance
from .results import ConflictPoint, MetricSeries
from .trace import ActorClass, ActorTrack, Trace, sample_track

CLOSING_SPEED_FLOOR = 1e-6  # m/s, below this the encounter counts as not closing
ARRIVAL_SPEED_FLOOR = 1e-3  # m/s, keeps predicted arrival times finite
BRAKING_ACCEL_FLOOR = -1e-6  # m/s^2, accelerations above this are not braking

WTTC_HORIZON = 20.0  # s, beyond this no worst-case collision is searched
WTTC_SCAN_STEP = 0.01  # s, root bracketing grid
WTTC_TOLERANCE = 1e-4  # s, bisection stop width

# worst-case acceleration magnitude assumed per actor class, m/s^2
DEFAULT_MAX_ACCEL = {
    ActorClass.VEHICLE: 8.0,
    ActorClass.PEDESTRIAN: 2.0,
    ActorClass.OTHER: 4.0,
}


def _tracks(trace: Trace, actor_ids: tuple[str, ...]) -> list[ActorTrack]:
    return [trace.track(a) for a in actor_ids]


def common_grid(trace: Trace, actor_ids: tuple[str, ...]) -> np.ndarray:
    """Sample times shared by the given actors, on the trace grid.

    When all involved tracks carry identical time arrays those times are
    reused verbatim, so metric samples line up exactly with recorded rows.
    """
    tracks = _tracks(trace, actor_ids)
    first = tracks[0].times
    if all(np.array_equal(first, tr.times) for tr in tracks[1:]):
        return first
    t0 = max(tr.first_time for tr in tracks)
    t1 = min(tr.last_time for tr in tracks)
    if t1 < t0:
        raise MetricError(f"actors {actor_ids} share no time overlap")
    count = int(math.floor((t1 - t0) / trace.time_step + 1e-9)) + 1
    return t0 + np.arange(count) * trace.time_step


def _velocity(sampled: dict) -> tuple[np.ndarray, np.ndarray]:
    vx = sampled["speed"] * np.cos(sampled["heading"])
    vy = sampled["speed"] * np.sin(sampled["heading"])
    return vx, vy


def euclidean_distance(trace: Trace, actor_a: str, actor_b: str) -> MetricSeries:
    """Center-to-center distance; defined on every shared sample."""
    times = common_grid(trace, (actor_a, actor_b))
    a = sample_track(trace.track(actor_a), times)
    b = sample_track(trace.track(actor_b), times)
    values = np.hypot(b["x"] - a["x"], b["y"] - a["y"])
    return MetricSeries(
        metric_name="euclidean_distance",
        actor_ids=(actor_a, actor_b),
        unit="m",
        times=times,
        values=values,
        defined=np.ones(len(times), dtype=bool),
    )


def headway(trace: Trace, ego: str, target: str) -> MetricSeries:
    """Bumper gap along the ego heading.

    The target offset is projected onto the ego heading; the sum of radii is
    subtracted from the projection. Defined only while the projection is
    positive, so targets abeam or behind yield undefined samples.
    """
    times = common_grid(trace, (ego, target))
    e = sample_track(trace.track(ego), times)
    t = sample_track(trace.track(target), times)
    proj = (t["x"] - e["x"]) * np.cos(e["heading"]) + (t["y"] - e["y"]) * np.sin(e["heading"])
    r_sum = trace.track(ego).radius + trace.track(target).radius
    defined = proj > 0.0
    return MetricSeries(
        metric_name="headway",
        actor_ids=(ego, target),
        unit="m",
        times=times,
        values=np.where(defined, proj - r_sum, 0.0),
        defined=defined,
    )


def ttc(trace: Trace, ego: str, target: str) -> MetricSeries:
    """Time to collision under constant velocities.

    Gap between the actor discs divided by the closing speed, where the
    closing speed is the shrink rate of the center distance computed from
    the current velocity vectors. Defined while the actors are apart and
    actually closing.
    """
    times = common_grid(trace, (ego, target))
    e = sample_track(trace.track(ego), times)
    t = sample_track(trace.track(target), times)
    dx = t["x"] - e["x"]
    dy = t["y"] - e["y"]
    dist = np.hypot(dx, dy)
    evx, evy = _velocity(e)
    tvx, tvy = _velocity(t)
    dvx = tvx - evx
    dvy = tvy - evy
    with np.errstate(invalid="ignore", divide="ignore"):
        closing = -np.where(dist > 0, (dx * dvx + dy * dvy) / dist, 0.0)
    r_sum = trace.track(ego).radius + trace.track(target).radius
    gap = dist - r_sum
    defined = (closing > CLOSING_SPEED_FLOOR) & (gap > 0.0)
    values = np.zeros(len(times))
    values[defined] = gap[defined] / closing[defined]
    return MetricSeries(
        metric_name="ttc",
        actor_ids=(ego, target),
        unit="s",
        times=times,
        values=values,
        defined=defined,
    )


def _wttc_root(
    dpx: float, dpy: float, dvx: float, dvy: float, r_sum: float, a_sum: float
) -> float | None:
    """Smallest t >= 0 where the straight-line offset enters the disc that
    grows as r_sum + 0.5*a_sum*t^2; None if no entry within the horizon."""

    def margin(t: np.ndarray | float):
        return np.hypot(dpx + dvx * t, dpy + dvy * t) - (r_sum + 0.5 * a_sum * t * t)

    if margin(0.0) <= 0.0:
        return 0.0
    grid = np.arange(0.0, WTTC_HORIZON + WTTC_SCAN_STEP / 2, WTTC_SCAN_STEP)
    inside = margin(grid) <= 0.0
    if not inside.any():
        return None
    j = int(np.argmax(inside))
    lo, hi = float(grid[j - 1]), float(grid[j])
    while hi - lo > WTTC_TOLERANCE:
        mid = 0.5 * (lo + hi)
        if margin(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def wttc(
    trace: Trace,
    ego: str,
    target: str,
    a_max_ego: float | None = None,
    a_max_target: float | None = None,
) -> MetricSeries:
    """Worst-case time to collision.

    Both actors keep their current velocity while an uncertainty disc around
    the relative position grows quadratically with the summed worst-case
    acceleration magnitudes. The value is the earliest time the relative
    offset can no longer stay outside the disc. Undefined when no such time
    exists within the search horizon. Acceleration bounds default per actor
    class when not given.
    """
    ego_track = trace.track(ego)
    target_track = trace.track(target)
    a_e = DEFAULT_MAX_ACCEL[ego_track.actor_class] if a_max_ego is None else float(a_max_ego)
    a_t = (
        DEFAULT_MAX_ACCEL[target_track.actor_class]
        if a_max_target is None
        else float(a_max_target)
    )
    if a_e < 0 or a_t < 0:
        raise MetricError("worst-case acceleration bounds must be >= 0")
    times = common_grid(trace, (ego, target))
    e = sample_track(ego_track, times)
    t = sample_track(target_track, times)
    dpx = t["x"] - e["x"]
    dpy = t["y"] - e["y"]
    evx, evy = _velocity(e)
    tvx, tvy = _velocity(t)
    dvx = tvx - evx
    dvy = tvy - evy
    r_sum = ego_track.radius + target_track.radius
    a_sum = a_e + a_t
    values = np.zeros(len(times))
    defined = np.zeros(len(times), dtype=bool)
    for i in range(len(times)):
        root = _wttc_root(dpx[i], dpy[i], dvx[i], dvy[i], r_sum, a_sum)
        if root is not None:
            values[i] = root
            defined[i] = True
    return MetricSeries(
        metric_name="wttc",
        actor_ids=(ego, target),
        unit="s",
        times=times,
        values=values,
        defined=defined,
    )


def _check_conflict_on_path(track: ActorTrack, arc: float, position: tuple[float, float]) -> None:
    # A conflict inside the traveled span must lie on the traveled path;
    # one beyond the traveled end is a statement about the planned path and
    # is taken on trust.
    traveled = float(track.arc_lengths[-1])
    if arc <= traveled + 1e-9:
        if point_polyline_distance(position[0], position[1], track.points) > 1e-6:
            raise MetricError(
                f"conflict point {position} not on the path of {track.actor_id!r}"
            )


def gap_time(trace: Trace, ego: str, target: str, conflict: ConflictPoint) -> MetricSeries:
    """Predicted arrival-time difference at a shared conflict point.

    Each actor's remaining arc to the conflict is divided by its current
    speed (floored at 1 mm/s, so a standing actor gets a very late, still
    finite arrival). Defined only while neither actor has passed the
    conflict; the series goes undefined from the first sample after either
    passes.
    """
    times = common_grid(trace, (ego, target))
    ego_track = trace.track(ego)
    target_track = trace.track(target)
    _check_conflict_on_path(ego_track, conflict.ego_arc_length, conflict.position)
    _check_conflict_on_path(target_track, conflict.other_arc_length, conflict.position)
    e = sample_track(ego_track, times)
    t = sample_track(target_track, times)
    remaining_e = conflict.ego_arc_length - e["arc"]
    remaining_t = conflict.other_arc_length - t["arc"]
    defined = (remaining_e > 0.0) & (remaining_t > 0.0)
    t_e = remaining_e / np.maximum(e["speed"], ARRIVAL_SPEED_FLOOR)
    t_t = remaining_t / np.maximum(t["speed"], ARRIVAL_SPEED_FLOOR)
    return MetricSeries(
        metric_name="gap_time",
        actor_ids=(ego, target),
        unit="s",
        times=times,
        values=np.where(defined, np.abs(t_e - t_t), 0.0),
        defined=defined,
    )


def braking_time(trace: Trace, actor: str) -> MetricSeries:
    """Time a braking actor needs to stop at its current deceleration.

    Defined exactly where the recorded acceleration is negative (below
    -1e-6 m/s^2); a standing actor that is still braking stops in 0 s.
    """
    times = common_grid(trace, (actor,))
    s = sample_track(trace.track(actor), times)
    defined = s["accel"] < BRAKING_ACCEL_FLOOR
    values = np.zeros(len(times))
    values[defined] = s["speed"][defined] / np.abs(s["accel"][defined])
    return MetricSeries(
        metric_name="braking_time",
        actor_ids=(actor,),
        unit="s",
        times=times,
        values=values,
        defined=defined,
    )


def braking_distance(trace: Trace, actor: str) -> MetricSeries:
    """Distance a braking actor covers before standing still."""
    times = common_grid(trace, (actor,))
    s = sample_track(trace.track(actor), times)
    defined = s["accel"] < BRAKING_ACCEL_FLOOR
    values = np.zeros(len(times))
    values[defined] = s["speed"][defined] ** 2 / (2.0 * np.abs(s["accel"][defined]))
    return MetricSeries(
        metric_name="braking_distance",
        actor_ids=(actor,),
        unit="m",
        times=times,
        values=values,
        defined=defined,
    )


def traffic_density(trace: Trace, center_actor: str, radius: float) -> MetricSeries:
    """Actors per square meter within a disc around one actor.

    Counts every other actor whose center lies within the radius; defined on
    every sample of the center actor, including when the count is zero.
    """
    if not radius > 0:
        raise MetricError("radius must be > 0")
    times = common_grid(trace, (center_actor,))
    c = sample_track(trace.track(center_actor), times)
    counts = np.zeros(len(times))
    for other_id in trace.actor_ids():
        if other_id == center_actor:
            continue
        track = trace.track(other_id)
        inside_span = (times >= track.first_time) & (times <= track.last_time)
        if not inside_span.any():
            continue
        o = sample_track(track, times[inside_span])
        d = np.hypot(o["x"] - c["x"][inside_span], o["y"] - c["y"][inside_span])
        counts[inside_span] += (d <= radius).astype(float)
    values = counts / (math.pi * radius * radius)
    return MetricSeries(
        metric_name="traffic_density",
        actor_ids=(center_actor,),
        unit="1/m^2",
        times=times,
        values=values,
        defined=np.ones(len(times), dtype=bool),
    )


def conflict_from_trace(trace: Trace, ego: str, target: str) -> ConflictPoint | None:
    """Crossing of the traveled paths of two actors, if any."""
    from .geometry import first_polyline_crossing

    hit = first_polyline_crossing(trace.track(ego).points, trace.track(target).points)
    if hit is None:
        return None
    (x, y), arc_ego, arc_other = hit
    return ConflictPoint(position=(x, y), ego_arc_length=arc_ego, other_arc_length=arc_other)
