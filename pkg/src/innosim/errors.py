"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A world, profile, payoff, or solver configuration is invalid."""


class IntegrityError(RuntimeError):
    """Two pieces of realized state do not belong to the same realization."""


class EnumerationBudgetExceeded(RuntimeError):
    """An exact subset enumeration would exceed the configured budget."""


class CompetitorCapExceeded(RuntimeError):
    """Inclusion-exclusion was asked to handle more competitor sets than its cap."""


class NonConvergence(RuntimeError):
    """An iterative numeric routine failed to converge within its iteration cap."""


class ManifestError(ValueError):
    """An experiment manifest is malformed or uses an unknown schema."""
