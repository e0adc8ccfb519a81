"""From a logical scenario to a concrete test suite.

A logical scenario declares parameter ranges; concretization expands the
full grid into individually identified concrete scenarios that a runner
can execute one by one.
"""

from importlib import resources

from scenq import concretize, grid_size, load_logical_scenario, parameter_coverage

DATA = resources.files("scenq") / "data"

logical = load_logical_scenario(str(DATA / "intersection_scenario.json"))
print(f"logical scenario: {logical.scenario_id}")
for p in logical.parameters:
    print(f"  {p.name}: {p.minimum} .. {p.maximum} step {p.step} [{p.unit}]"
          f" -> {p.count} values")
print(f"fixed bindings: {dict(logical.fixed)}")
print(f"grid size: {grid_size(logical)}")

runs = concretize(logical)
print(f"\nconcretized {len(runs)} scenarios, first three:")
for run in runs[:3]:
    print(f"  {run.scenario_id}: {run.bindings}")

# coverage tells you how much of the declared grid a given subset exercises
subset = runs[::7]
cov = parameter_coverage(logical, subset)
print(f"\nevery 7th run covers {cov.overall:.1%} of the grid")
for name, frac in cov.per_parameter.items():
    print(f"  {name}: {frac:.1%} of declared values seen")
