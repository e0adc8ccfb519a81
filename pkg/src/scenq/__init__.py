"""scenq: quality metrics for simulation-based testing of automated driving.

The package turns logical scenario descriptions into concrete runs,
simulates them with a deterministic kinematic model, computes quality
metrics at three resolution levels (per timestep, per scenario, per
scenario set), and judges the results against declarative quality criteria.
"""

__version__ = "0.1.0"

from .errors import (
    CriterionError,
    MetricError,
    ScenarioError,
    ScenqError,
    SimulationError,
    TraceError,
    TraceParseError,
    UnitMismatchError,
)
from .results import (
    ConflictPoint,
    EncroachmentZone,
    MetricResult,
    MetricSeries,
    OccupancyInterval,
    ScalarResult,
    scalar_to_dict,
    undefined_scalar,
    write_scalars,
    write_series,
)
from .trace import (
    ActorClass,
    ActorTrack,
    Trace,
    TraceFormat,
    ValidationIssue,
    ValidationReport,
    first_contact_time,
    load_trace,
    load_trace_file,
    resample,
    sample_track,
    save_trace,
    state_at,
    validate_trace,
    write_trace,
)
from .scenarios import (
    ConcreteScenario,
    LogicalScenario,
    ParameterRange,
    concretize,
    grid_size,
    iter_concretize,
    load_logical_scenario,
    logical_from_dict,
    logical_to_dict,
    save_logical_scenario,
    write_concrete_set,
)
from .simulator import (
    SimConfig,
    SimOutcome,
    conflict_from_metadata,
    conflict_of,
    load_sim_config,
    sim_config_from_dict,
    with_overrides,
    simulate,
    simulate_batch,
)
from .nano import (
    braking_distance,
    braking_time,
    conflict_from_trace,
    euclidean_distance,
    gap_time,
    headway,
    traffic_density,
    ttc,
    wttc,
)
from .micro import aggregate, build_encroachment_zone, et, occupancy, pet
from .macro import (
    CoverageResult,
    GapFinding,
    RepeatabilityEntry,
    RepeatabilityReport,
    collision_probability,
    detect_result_gaps,
    dtw,
    parameter_coverage,
    repeatability_report,
)
from .criteria import (
    ApplicationPeriod,
    ConditionNode,
    EvaluationReport,
    QualityCriterion,
    Scale,
    StopRule,
    Threshold,
    Verdict,
    active_intervals,
    all_of,
    always_active,
    any_of,
    comparison_margin,
    condition,
    evaluate_criterion,
    evaluate_suite,
    load_criteria,
    margin_holds,
    normalize_comparator,
)
from . import registry

__all__ = [
    "ActorClass",
    "ActorTrack",
    "ApplicationPeriod",
    "ConcreteScenario",
    "ConditionNode",
    "ConflictPoint",
    "CoverageResult",
    "CriterionError",
    "EncroachmentZone",
    "EvaluationReport",
    "GapFinding",
    "LogicalScenario",
    "MetricError",
    "MetricResult",
    "MetricSeries",
    "OccupancyInterval",
    "ParameterRange",
    "QualityCriterion",
    "RepeatabilityEntry",
    "RepeatabilityReport",
    "ScalarResult",
    "Scale",
    "ScenarioError",
    "ScenqError",
    "SimConfig",
    "SimOutcome",
    "SimulationError",
    "StopRule",
    "Threshold",
    "Trace",
    "TraceError",
    "TraceFormat",
    "TraceParseError",
    "UnitMismatchError",
    "ValidationIssue",
    "ValidationReport",
    "Verdict",
    "active_intervals",
    "aggregate",
    "all_of",
    "always_active",
    "any_of",
    "braking_distance",
    "braking_time",
    "build_encroachment_zone",
    "collision_probability",
    "comparison_margin",
    "concretize",
    "condition",
    "conflict_from_metadata",
    "conflict_from_trace",
    "conflict_of",
    "detect_result_gaps",
    "dtw",
    "et",
    "euclidean_distance",
    "first_contact_time",
    "evaluate_criterion",
    "evaluate_suite",
    "gap_time",
    "grid_size",
    "headway",
    "iter_concretize",
    "load_criteria",
    "load_logical_scenario",
    "load_sim_config",
    "logical_from_dict",
    "logical_to_dict",
    "load_trace",
    "load_trace_file",
    "margin_holds",
    "normalize_comparator",
    "occupancy",
    "parameter_coverage",
    "pet",
    "registry",
    "repeatability_report",
    "resample",
    "sample_track",
    "save_logical_scenario",
    "save_trace",
    "scalar_to_dict",
    "sim_config_from_dict",
    "simulate",
    "simulate_batch",
    "state_at",
    "traffic_density",
    "ttc",
    "undefined_scalar",
    "validate_trace",
    "wttc",
    "write_concrete_set",
    "write_scalars",
    "write_series",
    "write_trace",
]
