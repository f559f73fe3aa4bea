"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2,
StageDependencyError -> 3, NumericError -> 4.
"""


class LineVlpError(Exception):
    """Base class for all package-specific errors."""


class TaxonomyError(LineVlpError):
    """Unknown category, duplicate names, or an ill-formed taxonomy."""


class CurationError(LineVlpError):
    """Image-text pair curation failed (empty pool, bad annotation...)."""


class ManifestError(LineVlpError):
    """Manifest could not be written or read back consistently."""


class PlacementError(LineVlpError):
    """Synthetic scene generation could not place the requested objects."""


class ConfigError(LineVlpError):
    """Invalid or inconsistent pipeline configuration."""


class StageDependencyError(LineVlpError):
    """A pipeline stage was invoked without its predecessor's artifact."""


class NumericError(LineVlpError):
    """Training hit a non-finite loss; aborted with diagnostics."""
