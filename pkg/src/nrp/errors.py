"""Exception types shared across the package."""


class NrpError(Exception):
    """Base class for all package errors."""


class RowNormViolation(NrpError):
    def __init__(self, index, norm, limit):
        self.index = index
        self.norm = norm
        super().__init__(f"row {index} has norm {norm:.6g} > {limit:.6g}")


class BadLabel(NrpError):
    def __init__(self, index, value):
        self.index = index
        super().__init__(f"label at row {index} is {value!r}, expected +1 or -1")


class ZeroVector(NrpError):
    """Normalized margin requested for the zero vector."""


class NonFinite(NrpError):
    """A vector contains NaN or infinite entries."""


class Degenerate(NrpError):
    """A multiplicative simplex update started from a zero coordinate."""


class NonFiniteIterate(NrpError):
    def __init__(self, round_index):
        self.round_index = round_index
        super().__init__(f"non-finite iterate at round {round_index}")


class IncompatibleConfig(NrpError):
    """Learner/objective/order combination outside the supported regimes."""


class UnsupportedGeometry(NrpError):
    """No closed-form regret comparator exists for the requested set."""


class RejectionBudget(NrpError):
    """Rejection sampling stalled (margin too close to 1)."""
