"""Exception hierarchy shared by all modules."""


class PrimeSimplexError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(PrimeSimplexError, ValueError):
    pass


class InvalidResidueError(PrimeSimplexError, ValueError):
    pass


class SieveRangeError(PrimeSimplexError, ValueError):
    """A query needs a value beyond the sieve limit."""


class DomainError(PrimeSimplexError, ValueError):
    pass


class ModulusError(PrimeSimplexError, ValueError):
    pass


class DependentFormsError(PrimeSimplexError, ValueError):
    """Two linear forms in an instance are rational multiples of each other."""


class WOverflowError(PrimeSimplexError, OverflowError):
    """W = prod_{p <= omega} p no longer fits in signed 128-bit arithmetic."""


class BudgetExceededError(PrimeSimplexError, RuntimeError):
    """Exact summation would exceed the configured term budget; use mode='mc'."""


class NumericalInconsistencyError(PrimeSimplexError, ArithmeticError):
    """A quantity that must be nonnegative came out clearly negative."""
