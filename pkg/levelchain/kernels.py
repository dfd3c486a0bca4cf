"""Probabilities of flipping an exact l-bit pattern.

P(l) is the probability that one variation step flips a given set of l
bits and leaves the other n-l bits untouched. Under bitwise mutation
(rate p_m) it is P1(l) = p_m^l (1-p_m)^(n-l). Under bitwise mutation (rate
q_m) followed by binomial crossover (rate C_R, one forced donor component)
it is

  P2(l) = (1/n) [l + (n-l) C_R - n q_m C_R] C_R^(l-1) q_m^l (1-q_m C_R)^(n-l-1)

for 1 <= l <= n-1, with l = 0 and l = n evaluated from their own
derivations.
"""

import collections
import enum
import logging
import math

import numpy as np

from .errors import ConfigurationError, DomainError, SingularParameterError

log = logging.getLogger(__name__)

# Slack used when comparing P1 and P2 pointwise.
COMPARISON_SLACK = 1e-14


class Variant(enum.Enum):
    MUTATION_ONLY = "ea"
    MUTATION_CROSSOVER = "eac"


class FlipKernel(object):
    """Parameterization of one variation operator on n-bit strings.

    Use mutation_kernel(), crossover_kernel() or coupled_kernel() rather
    than calling the constructor directly.
    """

    __slots__ = ["variant", "n", "p_m", "q_m", "C_R"]

    def __init__(self, variant, n, p_m=None, q_m=None, C_R=None):
        if n < 1:
            raise DomainError("dimension must be positive, got %r" % (n,))
        if variant is Variant.MUTATION_ONLY:
            if p_m is None or not 0 < p_m < 1:
                raise DomainError("p_m must lie in (0, 1), got %r" % (p_m,))
        else:
            if q_m is None or not 0 < q_m < 1:
                raise DomainError("q_m must lie in (0, 1), got %r" % (q_m,))
            if C_R is None or not 0 < C_R <= 1:
                raise DomainError("C_R must lie in (0, 1], got %r" % (C_R,))
        self.variant = variant
        self.n = n
        self.p_m = p_m
        self.q_m = q_m
        self.C_R = C_R

    def __repr__(self):
        if self.variant is Variant.MUTATION_ONLY:
            return "FlipKernel(ea, n=%d, p_m=%r)" % (self.n, self.p_m)
        return "FlipKernel(eac, n=%d, q_m=%r, C_R=%r)" % (
            self.n, self.q_m, self.C_R)

    @property
    def rate(self):
        """The per-bit flip rate p = p_m, or C_R * q_m under crossover."""
        if self.variant is Variant.MUTATION_ONLY:
            return self.p_m
        return self.C_R * self.q_m

    def flip(self, l):
        if self.variant is Variant.MUTATION_ONLY:
            return p1_flip(l, self)
        return p2_flip(l, self)

    def table(self):
        """P(l) for l = 0..n as a float array."""
        return np.array([self.flip(l) for l in range(self.n + 1)])


def mutation_kernel(n, p_m):
    return FlipKernel(Variant.MUTATION_ONLY, n, p_m=p_m)


def crossover_kernel(n, q_m, C_R):
    return FlipKernel(Variant.MUTATION_CROSSOVER, n, q_m=q_m, C_R=C_R)


def coupled_kernel(n, p, C_R):
    """Mutation plus crossover with p_m = C_R * q_m = p, i.e. q_m = p / C_R."""
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1), got %r" % (p,))
    return crossover_kernel(n, p / C_R, C_R)


def check_coupled_rate(p, rate):
    """Raise unless the coupled rate p equals the rate implied by the others.

    `rate` is p_m for mutation alone and q_m * C_R with crossover.
    """
    if p is not None and rate is not None and not math.isclose(
            p, rate, rel_tol=1e-9, abs_tol=1e-15):
        raise ConfigurationError(
            "coupled rate p = %r disagrees with the given rates (%r)" %
            (p, rate))


def _check_l(l, n):
    if not 0 <= l <= n:
        raise DomainError("l = %r outside [0, %d]" % (l, n))


def p1_flip(l, kernel):
    """Probability that bitwise mutation flips exactly a given l-bit set."""
    if kernel.variant is not Variant.MUTATION_ONLY:
        raise DomainError("p1_flip needs a mutation-only kernel, got %r" %
                          (kernel,))
    _check_l(l, kernel.n)
    p = kernel.p_m
    return p ** l * (1.0 - p) ** (kernel.n - l)


def p2_flip(l, kernel):
    """Probability that mutation + binomial crossover flips a given l-bit set.

    Raises:
      DomainError: for l outside [0, n] or a mutation-only kernel.
      SingularParameterError: if q_m * C_R == 1 and l < n.
    """
    if kernel.variant is not Variant.MUTATION_CROSSOVER:
        raise DomainError("p2_flip needs a crossover kernel, got %r" %
                          (kernel,))
    n = kernel.n
    _check_l(l, n)
    q, cr = kernel.q_m, kernel.C_R
    if l == n:
        # The (1 - q C_R)^(-1) factor of the general formula cancels here.
        return cr ** (n - 1) * q ** n
    if q * cr >= 1.0:
        raise SingularParameterError(
            "q_m * C_R = %r makes P2(%d) singular" % (q * cr, l))
    if l == 0:
        return (1.0 - q) * (1.0 - q * cr) ** (n - 1)
    bracket = l + (n - l) * cr - n * q * cr
    return (bracket / n) * cr ** (l - 1) * q ** l * (1.0 - q * cr) ** (n - l - 1)


def flip_difference(l, p, C_R, n):
    """P2(l) - P1(l) under the coupled setting p_m = C_R q_m = p.

    Positive exactly when l > n p.
    """
    if not 0 < C_R < 1:
        raise DomainError("C_R must lie in (0, 1), got %r" % (C_R,))
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1), got %r" % (p,))
    if not 1 <= l <= n - 1:
        raise DomainError("l = %r outside [1, %d]" % (l, n - 1))
    return ((1.0 / C_R - 1.0) * (float(l) / n - p) *
            p ** l * (1.0 - p) ** (n - l - 1))


Theorem1Row = collections.namedtuple("Theorem1Row", "l, p1, p2, holds")


class Theorem1Report(object):
    """Pointwise comparison P1(l) <= P2(l) for l = 1..n.

    Attributes:
      rows: one Theorem1Row per l.
      holds: True when every row holds.
      in_scope: whether 0 < p <= 1/n, the range the comparison is proven for.
      boundary: whether C_R == 1, where both kernels coincide.
    """

    def __init__(self, n, p, C_R, rows):
        self.n = n
        self.p = p
        self.C_R = C_R
        self.rows = rows
        self.holds = all(row.holds for row in rows)
        self.in_scope = p <= 1.0 / n
        self.boundary = C_R == 1

    def violations(self):
        return [row.l for row in self.rows if not row.holds]

    def __bool__(self):
        return self.holds


def theorem1_holds(n, p, C_R):
    """Check P1(l, p) <= P2(l, C_R, p / C_R) for every 1 <= l <= n.

    The check runs for any p; a p above 1/n is reported as out of scope.
    """
    if not 0 < C_R <= 1:
        raise DomainError("C_R must lie in (0, 1], got %r" % (C_R,))
    mutation = mutation_kernel(n, p)
    crossover = coupled_kernel(n, p, C_R)
    rows = []
    for l in range(1, n + 1):
        a, b = p1_flip(l, mutation), p2_flip(l, crossover)
        rows.append(Theorem1Row(l, a, b, a <= b + COMPARISON_SLACK))
    report = Theorem1Report(n, p, C_R, rows)
    if not report.in_scope:
        log.warning("p = %r exceeds 1/n = %r: outside the proven range",
                    p, 1.0 / n)
    if report.boundary:
        log.info("C_R = 1: crossover degenerates to plain mutation")
    return report
