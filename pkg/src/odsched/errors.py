"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A file or in-memory structure violates its schema or invariants."""


class CatalogError(ValidationError):
    """Catalog file is malformed or inconsistent."""


class TraceError(ValidationError):
    """Characterization trace file is malformed or inconsistent."""


class ScenarioError(ValidationError):
    """Synthetic trace scenario description is malformed."""
