"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent user-facing configuration."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its requested tolerance."""


class QuadratureError(NumericalError):
    """Quadrature did not converge (e.g. non-integrable singularity)."""


class ResourceBudgetError(RuntimeError):
    """The requested computation exceeds the declared resource budget."""
