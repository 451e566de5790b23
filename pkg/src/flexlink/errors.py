"""Exception types shared across the package."""


class ModelError(ValueError):
    """Raised when a scenario, association or coupling model is inconsistent."""


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its mathematical domain."""


class ConfigError(ValueError):
    """Raised for invalid configuration files or CLI arguments."""


class InfeasibleError(RuntimeError):
    """Raised when a precondition on feasibility (e.g. utility > 1) fails."""
