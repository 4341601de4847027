"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2,
InvariantViolation -> 3, and I/O problems -> 4.
"""


class ConfigError(ValueError):
    """Invalid parameters, topology, or configuration."""


class DegenerateInstance(ConfigError):
    """Parameters make the instance unschedulable (e.g. no link can ever meet SINR)."""


class GenerationFailed(RuntimeError):
    """Topology generation exhausted its rejection budget."""


class InstanceTooLarge(ValueError):
    """Local instance exceeds the enumeration cap."""


class InvariantViolation(RuntimeError):
    """A runtime audit detected an infeasible schedule or a violated bound."""
