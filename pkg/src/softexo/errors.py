"""Exception types shared by all modules.

Every error carries a short machine-readable ``code`` that the command line
prints on stderr.
"""


class SoftExoError(Exception):
    code = "error"


class DomainError(SoftExoError, ValueError):
    """An argument lies outside the domain of the model."""

    code = "domain"


class GeometryError(DomainError):
    """Dimensions that cannot form a physical actuator or pouch."""

    code = "geometry"


class IntegrationError(SoftExoError, RuntimeError):
    """Time integration did not converge or was set up unstably."""

    code = "integration"


class ConfigError(SoftExoError, ValueError):
    code = "config"


class DataError(SoftExoError, ValueError):
    """Malformed input data (CSV schema, markers, grids)."""

    code = "data"
