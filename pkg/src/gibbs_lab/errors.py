"""Exception types shared across the package."""


class GibbsLabError(Exception):
    """Base class for all package errors."""


class ValidationError(GibbsLabError):
    """Malformed or inconsistent input data."""


class ZeroNetworkError(ValidationError):
    """Network with no positive weight at all."""


class IsolatedVertexError(GibbsLabError):
    """Operation requires every vertex to have positive degree."""


class DimensionError(GibbsLabError):
    """Vector length does not match the network dimension."""


class DisconnectedError(GibbsLabError):
    """Operation requires a connected network; decompose into components first."""


class DomainError(GibbsLabError):
    """Argument outside the mathematical domain of the operation."""


class OracleError(GibbsLabError):
    """Brute-force reference computation failed to converge."""


class FeasibilityError(OracleError):
    """Rejection sampling would exceed the proposal budget."""


class HNotPositiveError(GibbsLabError):
    """Drift floor is non-positive at the given parameters (scaling constant too small)."""
