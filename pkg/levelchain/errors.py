"""Exceptions raised by levelchain."""


class LevelChainError(Exception):
    """Base class for every error raised by levelchain."""
    pass


class DomainError(LevelChainError, ValueError):
    """An argument lies outside the domain of the operation."""
    pass


class ConfigurationError(LevelChainError):
    """Inputs are individually valid but inconsistent with each other."""
    pass


class SingularParameterError(DomainError):
    """The flip kernel was evaluated where q_m * C_R == 1."""
    pass


class DegenerateChainError(LevelChainError):
    """The chain has no non-optimal states."""
    pass


class UndefinedRateError(LevelChainError):
    """The average convergence rate is undefined (zero initial error)."""
    pass


class EnumerationLimitError(LevelChainError):
    """An exhaustive oracle was asked to enumerate beyond its limit."""
    pass


class InvalidMatrixError(LevelChainError):
    """A transition matrix is not upper triangular and column-stochastic."""
    pass
