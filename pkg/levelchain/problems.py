"""Level-decomposable pseudo-Boolean problems of the form max f(|x|).

A problem is described only through its error levels: which level every
ones-count falls on, and the approximation error of every level. Level 0 is
the optimum.
"""

import enum
import json
import logging

import numpy as np
from scipy import special

from .errors import ConfigurationError, DomainError

log = logging.getLogger(__name__)

# Tolerance on the total mass of a level distribution.
MASS_TOLERANCE = 1e-12


class ProblemKind(enum.Enum):
    ONEMAX = "onemax"
    DECEPTIVE = "deceptive"
    CUSTOM = "custom"


def binomial(n, k):
    """C(n, k) as a double; zero outside 0 <= k <= n."""
    if k < 0 or k > n:
        return 0.0
    return float(special.comb(n, k))


def _check_ones_count(ones_count, n):
    if not 0 <= ones_count <= n:
        raise DomainError("ones_count %r outside [0, %d]" % (ones_count, n))


def onemax_error(ones_count, n):
    """Level of a bitstring with `ones_count` ones on OneMax: its zeros."""
    _check_ones_count(ones_count, n)
    return n - ones_count


def deceptive_error(ones_count, n):
    """Level of a bitstring with `ones_count` ones on Deceptive.

    The all-ones string is the optimum; every other string sits one level
    above its ones-count, so the all-zeros string is the local optimum at
    level 1 and n-1 ones is the worst level n.
    """
    _check_ones_count(ones_count, n)
    if ones_count == n:
        return 0
    return ones_count + 1


class LevelProblem(object):
    """A problem of the form f(|x|) reduced to its error levels.

    Attributes:
      kind: a ProblemKind.
      n: the bitstring dimension.
      L: the highest level index.
      error_vector: read-only float array (e_0, ..., e_L).
      level_of_ones: read-only int array mapping ones-count c to its level.
    """

    def __init__(self, kind, n, error_vector, level_of_ones):
        if n < 1:
            raise DomainError("dimension must be positive, got %r" % (n,))
        error_vector = np.asarray(error_vector, dtype=float)
        level_of_ones = np.asarray(level_of_ones, dtype=int)
        if level_of_ones.shape != (n + 1,):
            raise ConfigurationError(
                "level_of_ones needs %d entries, got %d" %
                (n + 1, level_of_ones.size))
        if error_vector.ndim != 1 or error_vector.size < 1:
            raise ConfigurationError("error_vector must be a non-empty vector")
        if error_vector[0] != 0:
            raise ConfigurationError(
                "error_vector[0] must be 0, got %r" % (error_vector[0],))
        if np.any(np.diff(error_vector) < 0):
            raise ConfigurationError("error_vector must be non-decreasing")
        L = error_vector.size - 1
        if level_of_ones.min() < 0 or level_of_ones.max() > L:
            raise ConfigurationError(
                "level_of_ones must map into 0..%d" % L)
        self.kind = kind
        self.n = n
        self.L = L
        self.error_vector = error_vector
        self.error_vector.setflags(write=False)
        self.level_of_ones = level_of_ones
        self.level_of_ones.setflags(write=False)

    def __repr__(self):
        return "LevelProblem(%s, n=%d, L=%d)" % (self.kind.value, self.n, self.L)

    def level(self, ones_count):
        """The level of a bitstring with `ones_count` ones."""
        _check_ones_count(ones_count, self.n)
        return int(self.level_of_ones[ones_count])

    def is_bijective(self):
        return (self.L == self.n and
                np.array_equal(np.sort(self.level_of_ones),
                               np.arange(self.n + 1)))

    def ones_of_level(self):
        """Inverse of level_of_ones, defined for bijective level maps.

        Raises:
          ConfigurationError: if the level map is not a bijection.
        """
        if not self.is_bijective():
            raise ConfigurationError(
                "%r: level_of_ones is not a bijection onto 0..n" % (self,))
        inverse = np.empty(self.n + 1, dtype=int)
        inverse[self.level_of_ones] = np.arange(self.n + 1)
        return inverse


def onemax(n):
    return LevelProblem(
        ProblemKind.ONEMAX, n,
        error_vector=np.arange(n + 1, dtype=float),
        level_of_ones=[onemax_error(c, n) for c in range(n + 1)])


def deceptive(n):
    return LevelProblem(
        ProblemKind.DECEPTIVE, n,
        error_vector=np.arange(n + 1, dtype=float),
        level_of_ones=[deceptive_error(c, n) for c in range(n + 1)])


def custom(n, error_vector, level_of_ones):
    problem = LevelProblem(ProblemKind.CUSTOM, n, error_vector, level_of_ones)
    if not problem.is_bijective():
        raise ConfigurationError(
            "custom level_of_ones must be a bijection onto 0..%d" % n)
    return problem


def load_custom(path):
    """Load a custom problem from a JSON file.

    The file holds `n`, `error_vector` (n+1 numbers) and `level_of_ones`
    (n+1 level indices).
    """
    try:
        with open(path) as f:
            spec = json.load(f)
    except (IOError, ValueError) as e:
        raise ConfigurationError("cannot read custom problem %r: %s" % (path, e))
    missing = set(["n", "error_vector", "level_of_ones"]) - set(spec)
    if missing:
        raise ConfigurationError(
            "custom problem %r lacks %s" % (path, ", ".join(sorted(missing))))
    problem = custom(int(spec["n"]), spec["error_vector"], spec["level_of_ones"])
    log.info("loaded %r from %s", problem, path)
    return problem


def make_problem(name, n, custom_file=None):
    """Build a problem from its CLI/config name."""
    if n is None and name != ProblemKind.CUSTOM.value:
        raise ConfigurationError("problem %r needs a dimension n" % (name,))
    if name == ProblemKind.ONEMAX.value:
        return onemax(n)
    if name == ProblemKind.DECEPTIVE.value:
        return deceptive(n)
    if name == ProblemKind.CUSTOM.value:
        if not custom_file:
            raise ConfigurationError("custom problems need a problem file")
        problem = load_custom(custom_file)
        if n is not None and problem.n != n:
            raise ConfigurationError(
                "custom problem has n=%d but n=%d was requested" %
                (problem.n, n))
        return problem
    raise ConfigurationError("unknown problem %r" % (name,))


class LevelDistribution(object):
    """A probability vector over levels 0..L."""

    def __init__(self, q):
        q = np.array(q, dtype=float)
        if q.ndim != 1 or q.size < 1:
            raise DomainError("a level distribution must be a non-empty vector")
        if np.any(q < 0) or np.any(q > 1):
            raise DomainError("distribution entries must lie in [0, 1]")
        total = q.sum()
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise DomainError("distribution sums to %.17g, not 1" % total)
        self.q = q
        self.q.setflags(write=False)

    @property
    def L(self):
        return self.q.size - 1

    def __repr__(self):
        return "LevelDistribution(L=%d)" % self.L

    @classmethod
    def uniform(cls, L):
        return cls(np.full(L + 1, 1.0 / (L + 1)))

    @classmethod
    def point_mass(cls, L, level):
        q = np.zeros(L + 1)
        q[level] = 1.0
        return cls(q)


def initial_distribution(problem):
    """Level distribution of a uniformly random initial bitstring."""
    n = problem.n
    q = np.zeros(problem.L + 1)
    for c in range(n + 1):
        q[problem.level_of_ones[c]] += binomial(n, c) / 2.0 ** n
    return LevelDistribution(q)
