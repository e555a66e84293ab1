"""Exception types shared across the simulator."""


class DomainError(ValueError):
    """An operation was called with arguments outside its contract."""


class ConfigError(ValueError):
    """A scenario or field configuration is invalid."""


class RegistrationRefused(Exception):
    """No reachable gateway recognises the node's home prefix."""


class AdmissionDeferred(Exception):
    """Destination cluster is at its maximum threshold; retry after rebalancing."""


class ComparisonInvalid(ValueError):
    """Two runs being compared were not produced from the same scenario."""


class InvariantViolation(RuntimeError):
    """Internal consistency check failed during a run."""
