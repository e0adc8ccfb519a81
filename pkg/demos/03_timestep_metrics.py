"""Per-timestep safety metrics on a recorded trace.

Every metric returns a series over a common time grid with an explicit
definedness flag per sample. Undefined is a first-class answer: time to
collision does not exist while the gap is opening, braking measures do
not exist while the vehicle accelerates.
"""

from importlib import resources

from scenq import aggregate, load_sim_config, registry, simulate

DATA = resources.files("scenq") / "data"

config = load_sim_config(str(DATA / "intersection_config.json"))
trace = simulate({"v_max": 32.0, "t_cross": 5.0, "d_start": 16.0}, config).trace

pair = {"ego": "ego", "target": "pedestrian",
        "actor_a": "ego", "actor_b": "pedestrian"}
print(f"{'metric':22s} {'unit':6s} {'defined':>9s} {'min':>10s} {'max':>10s}")
for name in ("euclidean_distance", "headway", "ttc", "wttc", "gap_time"):
    series = registry.get(name).compute(trace, pair)
    lo = aggregate(series, "min")
    hi = aggregate(series, "max")
    span = f"{lo.value:10.3f} {hi.value:10.3f}" if lo.defined else f"{'-':>10s} {'-':>10s}"
    print(f"{name:22s} {series.unit:6s} {series.defined_fraction:8.1%}  {span}")

for name in ("braking_time", "braking_distance"):
    series = registry.get(name).compute(trace, {"actor": "ego"})
    worst = aggregate(series, "max")
    print(f"{name:22s} {series.unit:6s} {series.defined_fraction:8.1%}  "
          f"worst {worst.value:.2f} {series.unit}" if worst.defined else name)

# a series knows when it is speaking: the arrival gap stops existing the
# moment the first actor has passed the conflict point
gap = registry.get("gap_time").compute(trace, pair)
defined_until = gap.times[gap.defined][-1]
print(f"\ngap_time defined up to t={defined_until:.2f} s "
      f"(pedestrian passes the conflict at "
      f"{trace.metadata['event_ped_passed_conflict']} s)")
