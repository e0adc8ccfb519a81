"""Per-scenario conflict metrics: encroachment zone, occupancy, PET, ET.

The encroachment zone is the overlap of the two swept corridors around
the actors' traveled paths. Occupancy intervals are interpolated at the
zone boundary, so the post encroachment time does not quantize to the
sampling grid.
"""

from importlib import resources

from scenq import (
    build_encroachment_zone,
    et,
    load_sim_config,
    occupancy,
    pet,
    simulate,
)
from scenq.geometry import polygon_area

DATA = resources.files("scenq") / "data"

config = load_sim_config(str(DATA / "intersection_config.json"))
trace = simulate({"v_max": 32.0, "t_cross": 5.0, "d_start": 16.0}, config).trace

zone = build_encroachment_zone(trace, "ego", "pedestrian")
print(f"zone vertices: {[(round(float(x), 2), round(float(y), 2)) for x, y in zone.polygon]}")
print(f"zone area: {polygon_area(zone.polygon):.2f} m^2, derived from {zone.derived_from}")

for actor in ("ego", "pedestrian"):
    for interval in occupancy(trace, actor, zone):
        print(f"  {actor:10s} occupies {interval.entry_time:6.2f} .. "
              f"{interval.exit_time:6.2f} s ({interval.duration:.2f} s)")

result = pet(trace, "ego", "pedestrian", zone)
if result.defined:
    print(f"\npost encroachment time: {result.value:.3f} s "
          f"(first through: {result.context['first_actor']})")
else:
    print(f"\npost encroachment time undefined: {result.context}")

ped_et = et(trace, "pedestrian", zone)
print(f"pedestrian encroachment time: {ped_et.value:.3f} s")

# widening the corridors makes the zone larger: PET shrinks, ET grows
for inflation in (0.0, 0.5, 1.0):
    z = build_encroachment_zone(trace, "ego", "pedestrian", inflation=inflation)
    p = pet(trace, "ego", "pedestrian", z)
    e = et(trace, "pedestrian", z)
    print(f"inflation {inflation:.1f} m -> zone {polygon_area(z.polygon):5.2f} m^2, "
          f"pet {p.value:5.3f} s, et {e.value:5.3f} s")
