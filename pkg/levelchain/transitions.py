"""Level transition matrices of elitist (1+1) algorithms.

r[i][j] is the probability of moving from level j to level i in one
generation. Elitist selection never accepts a worse level, so every matrix
here is upper triangular and column-stochastic, with the optimum (level 0)
absorbing. Only the entries above the diagonal are derived; the diagonal
is whatever mass a column has left.
"""

import collections
import logging
import reprlib

import numpy as np
from scipy import special

from . import kernels
from . import problems
from .errors import (ConfigurationError, EnumerationLimitError,
                     InvalidMatrixError)

log = logging.getLogger(__name__)

repr_obj = reprlib.Repr()
repr_obj.maxother = 120
repper = repr_obj.repr

# Column sums may drift this far from 1.
STOCHASTIC_TOLERANCE = 1e-12
# Negative entries closer to zero than this are rounding noise.
CLAMP_TOLERANCE = 1e-15
# Diagonal residues below -RESIDUE_TOLERANCE are errors, not noise.
RESIDUE_TOLERANCE = 1e-12
# Slack for the entrywise comparisons of dominance and the ordering
# conditions.
COMPARE_TOLERANCE = 1e-12

# Exhaustive oracle limits.
MUTATION_ENUMERATION_LIMIT = 8
CROSSOVER_ENUMERATION_LIMIT = 5


class TransitionMatrix(object):
    """An immutable (L+1)x(L+1) upper triangular column-stochastic matrix.

    Attributes:
      r: read-only float array, r[i, j] = Pr{next level i | level j}.
      L: the highest level index.
    """

    def __init__(self, r):
        r = np.array(r, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 1:
            raise InvalidMatrixError("matrix must be square, got shape %r" %
                                     (r.shape,))
        if np.any(np.tril(r, -1) != 0):
            i, j = np.argwhere(np.tril(r, -1) != 0)[0]
            raise InvalidMatrixError(
                "entry r[%d][%d] = %r below the diagonal" % (i, j, r[i, j]))
        r[(r < 0) & (r >= -CLAMP_TOLERANCE)] = 0.0
        r[(r > 1) & (r <= 1 + STOCHASTIC_TOLERANCE)] = 1.0
        if np.any(r < 0) or np.any(r > 1):
            i, j = np.argwhere((r < 0) | (r > 1))[0]
            raise InvalidMatrixError(
                "entry r[%d][%d] = %r outside [0, 1]" % (i, j, r[i, j]))
        sums = r.sum(axis=0)
        bad = np.abs(sums - 1.0) > STOCHASTIC_TOLERANCE
        if np.any(bad):
            j = int(np.argmax(bad))
            raise InvalidMatrixError("column %d sums to %.17g" % (j, sums[j]))
        self.r = r
        self.r.setflags(write=False)

    @classmethod
    def from_offdiagonal(cls, upper):
        """Complete the strictly upper part of `upper` with its diagonal.

        Raises:
          InvalidMatrixError: if a column's off-diagonal mass exceeds 1 by
            more than RESIDUE_TOLERANCE.
        """
        r = np.triu(np.array(upper, dtype=float), 1)
        residue = 1.0 - r.sum(axis=0)
        if np.any(residue < -RESIDUE_TOLERANCE):
            j = int(np.argmin(residue))
            raise InvalidMatrixError(
                "column %d has off-diagonal mass %.17g > 1" % (j, 1 - residue[j]))
        np.fill_diagonal(r, np.maximum(residue, 0.0))
        return cls(r)

    @property
    def L(self):
        return self.r.shape[0] - 1

    @property
    def submatrix(self):
        """Transitions among the non-optimal levels 1..L."""
        return self.r[1:, 1:]

    def column_sums(self):
        return self.r.sum(axis=0)

    def escape(self, j):
        """Probability of leaving level j in one generation."""
        return float(self.r[:j, j].sum())

    def __repr__(self):
        return "TransitionMatrix(L=%d, %s)" % (self.L, repper(self.r.tolist()))


def _check_kernel(n, kernel):
    if kernel.n != n:
        raise ConfigurationError(
            "kernel is for n=%d but the problem has n=%d" % (kernel.n, n))


def binomial_table(n):
    """C(a, b) for 0 <= a, b <= n as an (n+1)x(n+1) float array."""
    N = np.arange(n + 1)
    return special.comb(N[:, None], N[None, :])


def build_onemax(n, kernel):
    """Transition matrix of OneMax; level j has j zeros.

    Moving from level j to i < j flips j-i+k zeros and k ones.
    """
    _check_kernel(n, kernel)
    P = kernel.table()
    upper = np.zeros((n + 1, n + 1))
    for j in range(1, n + 1):
        for i in range(j):
            upper[i, j] = sum(
                problems.binomial(n - j, k) *
                problems.binomial(j, k + j - i) *
                P[2 * k + j - i]
                for k in range(min(n - j, i) + 1))
    matrix = TransitionMatrix.from_offdiagonal(upper)
    log.info("built OneMax matrix n=%d with %r", n, kernel)
    return matrix


def build_deceptive(n, kernel):
    """Transition matrix of Deceptive; level j >= 1 has j-1 ones.

    Reaching a non-optimal level i < j flips j-i+k ones and k zeros;
    reaching the optimum flips all n-j+1 zeros and nothing else.
    """
    if n < 2:
        raise ConfigurationError("Deceptive needs n >= 2, got %d" % n)
    _check_kernel(n, kernel)
    P = kernel.table()
    upper = np.zeros((n + 1, n + 1))
    for j in range(1, n + 1):
        upper[0, j] = P[n - j + 1]
        for i in range(1, j):
            upper[i, j] = sum(
                problems.binomial(n - j + 1, k) *
                problems.binomial(j - 1, k + j - i) *
                P[2 * k + j - i]
                for k in range(min(n - j + 1, i - 1) + 1))
    matrix = TransitionMatrix.from_offdiagonal(upper)
    log.info("built Deceptive matrix n=%d with %r", n, kernel)
    return matrix


Moves = collections.namedtuple("Moves", "ones, flips, weights")


class MoveTable(object):
    """Improving moves of a bijective level problem on the ones-count.

    From a string with c ones, flipping a of its ones and b of its zeros
    yields c - a + b ones with probability C(c, a) C(n-c, b) P(a + b).
    """

    def __init__(self, problem, kernel, binomials=None):
        _check_kernel(problem.n, kernel)
        problem.ones_of_level()
        self.problem = problem
        self.n = problem.n
        if binomials is None:
            binomials = binomial_table(self.n)
        self.binomials = binomials
        self.P = kernel.table()

    def with_kernel(self, kernel):
        """The same table under another kernel, reusing the binomials."""
        return MoveTable(self.problem, kernel, self.binomials)

    def improving(self, c):
        """Moves from ones-count c that land on a strictly lower level."""
        n = self.n
        a = np.arange(c + 1)[:, None]
        b = np.arange(n - c + 1)[None, :]
        ones = c - a + b
        weights = (self.binomials[c, a] * self.binomials[n - c, b] *
                   self.P[a + b])
        levels = self.problem.level_of_ones[ones]
        better = levels < self.problem.level_of_ones[c]
        flips = np.broadcast_to(a + b, ones.shape)
        return Moves(ones[better], flips[better], weights[better])


def build_from_level_map(problem, kernel):
    """Transition matrix of any problem with a bijective level map."""
    inverse = problem.ones_of_level()
    table = MoveTable(problem, kernel)
    upper = np.zeros((problem.L + 1, problem.L + 1))
    for j in range(1, problem.L + 1):
        moves = table.improving(inverse[j])
        np.add.at(upper[:, j], problem.level_of_ones[moves.ones], moves.weights)
    matrix = TransitionMatrix.from_offdiagonal(upper)
    log.info("built %r matrix from its level map with %r", problem, kernel)
    return matrix


def build_for_problem(problem, kernel):
    if problem.kind is problems.ProblemKind.ONEMAX:
        return build_onemax(problem.n, kernel)
    if problem.kind is problems.ProblemKind.DECEPTIVE:
        return build_deceptive(problem.n, kernel)
    return build_from_level_map(problem, kernel)


def _all_masks(n):
    return ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)


def _mask_probabilities(masks, rate):
    k = masks.sum(axis=1)
    return rate ** k * (1.0 - rate) ** (masks.shape[1] - k)


def _flip_outcomes(kernel):
    """Every flip pattern the operator can produce, with its probability.

    Returns an (m, n) boolean array of patterns and a length-m weight vector;
    patterns may repeat.
    """
    n = kernel.n
    masks = _all_masks(n)
    if kernel.variant is kernels.Variant.MUTATION_ONLY:
        if n > MUTATION_ENUMERATION_LIMIT:
            raise EnumerationLimitError(
                "mutation oracle enumerates at most n=%d, got n=%d" %
                (MUTATION_ENUMERATION_LIMIT, n))
        return masks, _mask_probabilities(masks, kernel.p_m)
    if n > CROSSOVER_ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            "crossover oracle enumerates at most n=%d, got n=%d" %
            (CROSSOVER_ENUMERATION_LIMIT, n))
    mutation_p = _mask_probabilities(masks, kernel.q_m)
    crossover_p = _mask_probabilities(masks, kernel.C_R)
    forced = np.eye(n, dtype=bool)
    # Axes: mutation mask, crossover mask, forced index, bit.
    taken = masks[None, :, None, :] | forced[None, None, :, :]
    flips = masks[:, None, None, :] & taken
    weights = np.broadcast_to(
        mutation_p[:, None, None] * crossover_p[None, :, None] / float(n),
        flips.shape[:3])
    return flips.reshape(-1, n), weights.reshape(-1)


def bruteforce_transition(n, problem, kernel, representative="leading"):
    """Transition matrix by exhaustive enumeration of operator randomness.

    One bitstring stands for each level: its ones sit in the leading
    positions ("leading") or the trailing ones ("trailing"). Since f
    depends only on |x|, both choices must give the same matrix.

    Raises:
      EnumerationLimitError: above n=8 for mutation, n=5 for crossover.
    """
    if problem.n != n:
        raise ConfigurationError(
            "problem has n=%d but n=%d was requested" % (problem.n, n))
    _check_kernel(n, kernel)
    inverse = problem.ones_of_level()
    flips, weights = _flip_outcomes(kernel)
    r = np.zeros((problem.L + 1, problem.L + 1))
    for j in range(problem.L + 1):
        c = inverse[j]
        x = np.zeros(n, dtype=bool)
        if representative == "leading":
            x[:c] = True
        elif representative == "trailing":
            x[n - c:] = True
        else:
            raise ConfigurationError(
                "unknown representative %r" % (representative,))
        levels = problem.level_of_ones[(x ^ flips).sum(axis=1)]
        accepted = levels <= j
        np.add.at(r[:, j], levels[accepted], weights[accepted])
        r[j, j] += weights[~accepted].sum()
    log.info("enumerated %d outcomes per level for %r", weights.size, kernel)
    return TransitionMatrix(r)


def counterexample_pair(n):
    """Two artificial chains R and S where S dominates R.

    R: r[0][j] = j/n^3, r[j-1][j] = (j-1)/n^2.
    S: s[0][j] = 2j/n^3, s[j-1][j] = (j-1)(1/n^2 + 1/(2n)).
    """
    if n < 3:
        raise ConfigurationError("counterexample chains need n >= 3, got %d" % n)
    n3 = float(n) ** 3
    n2 = float(n) ** 2
    upper_r = np.zeros((n + 1, n + 1))
    upper_s = np.zeros((n + 1, n + 1))
    for j in range(1, n + 1):
        upper_r[0, j] = j / n3
        upper_s[0, j] = 2 * j / n3
        if j >= 2:
            upper_r[j - 1, j] = (j - 1) / n2
            upper_s[j - 1, j] = (j - 1) * (1.0 / n2 + 1.0 / (2 * n))
    return (TransitionMatrix.from_offdiagonal(upper_r),
            TransitionMatrix.from_offdiagonal(upper_s))


def _check_same_size(A, B):
    if A.r.shape != B.r.shape:
        raise ConfigurationError("matrices have shapes %r and %r" %
                                 (A.r.shape, B.r.shape))


class DominanceResult(object):
    """Outcome of comparing the improving entries of two matrices.

    Attributes:
      dominates: True iff a[i][j] >= b[i][j] for all i < j, strictly somewhere.
      violation: the first (i, j) with a[i][j] < b[i][j], or None.
      strict: the first (i, j) with a[i][j] > b[i][j], or None.
    """

    def __init__(self, violation, strict):
        self.violation = violation
        self.strict = strict
        self.dominates = violation is None and strict is not None

    def __bool__(self):
        return self.dominates

    def witness(self):
        return self.violation if self.violation is not None else self.strict

    def __repr__(self):
        return "DominanceResult(dominates=%r, violation=%r, strict=%r)" % (
            self.dominates, self.violation, self.strict)


def _first_by_column(mask):
    hits = np.argwhere(mask.T)
    if hits.size == 0:
        return None
    j, i = hits[0]
    return (int(i), int(j))


def dominates(A, B):
    """Whether A dominates B on every improving entry, strictly somewhere."""
    _check_same_size(A, B)
    above = np.triu(np.ones(A.r.shape, dtype=bool), 1)
    diff = A.r - B.r
    violation = _first_by_column(above & (diff < -COMPARE_TOLERANCE))
    strict = _first_by_column(above & (diff > COMPARE_TOLERANCE))
    return DominanceResult(violation, strict)


Condition = collections.namedtuple("Condition", "holds, first_violation")


class OrderingConditions(object):
    """Sufficient conditions for the EAE/TP of chain R never to exceed S's.

    conC1: s[j][j] >= r[j][j] for all j.
    conC2: sum_{l<i} (r[l][j] - s[l][j]) >= 0 for all i < j.
    conC3: sum_{l<=i} (s[l][j-1] - s[l][j]) >= 0 for all i < j-1.
    """

    def __init__(self, conC1, conC2, conC3):
        self.conC1 = conC1
        self.conC2 = conC2
        self.conC3 = conC3

    @property
    def holds(self):
        return self.conC1.holds and self.conC2.holds and self.conC3.holds

    def as_dict(self):
        return dict((name, dict(holds=c.holds, first_violation=c.first_violation))
                    for name, c in (("conC1", self.conC1),
                                    ("conC2", self.conC2),
                                    ("conC3", self.conC3)))

    def __repr__(self):
        return "OrderingConditions(%r)" % (self.as_dict(),)


def lemma3_conditions(R, S):
    """Evaluate conC1-conC3 with R in the faster role and S in the slower."""
    _check_same_size(R, S)
    r, s = R.r, S.r
    size = r.shape[0]
    first1 = None
    for j in range(size):
        if s[j, j] - r[j, j] < -COMPARE_TOLERANCE:
            first1 = (j,)
            break
    first2 = None
    # prefix[i, j] = sum_{l < i} (r[l][j] - s[l][j])
    prefix = np.vstack([np.zeros(size), np.cumsum(r - s, axis=0)])
    for j in range(size):
        for i in range(j):
            if prefix[i, j] < -COMPARE_TOLERANCE:
                first2 = (i, j)
                break
        if first2 is not None:
            break
    first3 = None
    running = np.cumsum(s, axis=0)
    for j in range(1, size):
        for i in range(j - 1):
            if running[i, j - 1] - running[i, j] < -COMPARE_TOLERANCE:
                first3 = (i, j)
                break
        if first3 is not None:
            break
    return OrderingConditions(Condition(first1 is None, first1),
                              Condition(first2 is None, first2),
                              Condition(first3 is None, first3))
