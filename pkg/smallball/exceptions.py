"""
smallball: exception hierarchy

Every error raised on purpose by the library derives from SmallballError,
so callers can catch one class the way they would catch a client error.
"""


class SmallballError(Exception):
    """Base exception for all smallball failures."""
    pass


class InvalidDistributionError(SmallballError, ValueError):
    """Raised when atoms/weights do not describe a probability law."""
    pass


class InvalidParameterError(SmallballError, ValueError):
    """Raised when a numeric parameter is outside its admissible range."""
    pass


class AtomBudgetExceeded(SmallballError):
    """Raised when an exact law would need more atoms than the configured budget.

    Callers are expected to switch to a Monte Carlo estimate.
    """

    def __init__(self, needed: int, budget: int):
        self.needed = needed
        self.budget = budget
        super().__init__(f"exact law needs at least {needed} atoms, budget is {budget}")


class GapCapExceeded(SmallballError):
    """Raised when a GAP is too large to enumerate."""

    def __init__(self, volume: int, cap: int):
        self.volume = volume
        self.cap = cap
        super().__init__(f"GAP volume {volume} exceeds enumeration cap {cap}")


class QuadratureError(SmallballError):
    """Raised when adaptive quadrature does not converge within its budget."""
    pass


class DegenerateEstimateError(SmallballError):
    """Raised when a Monte Carlo estimate carries no information (e.g. zero window on a continuous law)."""
    pass


class UnsupportedRankError(SmallballError):
    """Raised when a GAP search is asked for a rank above the supported maximum."""
    pass
