"""Exception types shared across the package."""


class ReserveMarketError(Exception):
    """Base class for all package errors."""


class ParseError(ReserveMarketError):
    """Case file is malformed or carries unknown keys."""


class ValidationError(ReserveMarketError):
    """One or more case invariants are violated."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msgs = "; ".join(f"[{d.severity}] {d.entity}: {d.message}" for d in self.diagnostics)
        super().__init__(msgs)


class SingularNetworkError(ReserveMarketError):
    """Disconnected graph or degenerate reactances."""


class DimensionMismatch(ReserveMarketError):
    """Vector length does not match the network dimensions."""


class InvalidK(ReserveMarketError):
    """Cluster count outside [1, bus count]."""


class EmptyZoneError(ReserveMarketError):
    """A reserve zone contains no generator."""


class EmptyHistory(ReserveMarketError):
    """Offer computation requires at least one historical run."""


class CoverageError(ReserveMarketError):
    """An assignment or offer set does not cover every entity it must."""


class InfeasibleError(ReserveMarketError):
    """The market has no feasible commitment (hard requirements unmeetable)."""


class TimeLimitNoIncumbent(ReserveMarketError):
    """Solver hit the time limit before finding any incumbent."""


class DualUnavailable(ReserveMarketError):
    """Pricing LP solved but duals could not be recovered."""


class VariantMismatch(ReserveMarketError):
    """Prices and solution come from different variant runs."""


class EmptyClass(ReserveMarketError):
    """Fuel class has no generators."""
