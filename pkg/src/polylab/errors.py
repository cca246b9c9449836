"""Exception types shared across the package."""


class PolylabError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(PolylabError):
    """An argument violated a documented precondition."""


class DegeneracyError(PolylabError):
    """Input points are affinely dependent within tolerance.

    ``subset_size`` records how many affinely independent points were found
    before the construction stalled.
    """

    def __init__(self, message: str, subset_size: int | None = None):
        super().__init__(message)
        self.subset_size = subset_size


class LatticeError(PolylabError):
    """The facet lattice of a polytope is internally inconsistent."""


class UnsupportedReferenceError(PolylabError):
    """No exact or quadrature reference value exists for this (body, ell) pair."""


class MissingPanelError(PolylabError):
    """An estimated intrinsic volume was requested without a projection panel."""


class ConfigError(PolylabError):
    """Invalid experiment or campaign configuration."""
