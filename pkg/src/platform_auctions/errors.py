"""Error types shared across the package."""


class ConstructionError(ValueError):
    """Invalid parameters when building a distribution or mechanism."""


class DomainError(ValueError):
    """Input outside the domain an operation is defined on."""


class DegenerateInputError(ValueError):
    """Input that makes the requested quantity meaningless (e.g. 0/0 ratios)."""
