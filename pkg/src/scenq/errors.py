"""Exception types raised across the package."""

from __future__ import annotations


class ScenqError(Exception):
    """Base class for all errors raised by this package."""


class TraceError(ScenqError):
    """Invalid trace content or an operation outside a trace's domain."""


class TraceParseError(TraceError):
    """Malformed trace input.

    Attributes:
        line: 1-based line number of the offending row, when known.
        actor_id: Actor the offending row belongs to, when known.
    """

    def __init__(self, message: str, *, line: int | None = None, actor_id: str | None = None):
        super().__init__(message)
        self.line = line
        self.actor_id = actor_id


class ScenarioError(ScenqError):
    """Invalid parameter range, logical scenario, or off-grid binding."""


class SimulationError(ScenqError):
    """Invalid simulator configuration or missing scenario bindings."""


class MetricError(ScenqError):
    """A metric cannot be computed from the given inputs."""


class CriterionError(ScenqError):
    """Invalid criterion definition or criterion/metric mismatch."""


class UnitMismatchError(CriterionError):
    """Criterion bound unit does not match the metric unit."""
