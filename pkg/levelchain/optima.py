"""Escape probabilities from level j straight to the optimum of Deceptive.

From level j (j-1 ones) the optimum is reached by flipping exactly the
n-j+1 zeros. Under mutation this happens with probability

  p0j = p_m^(n-j+1) (1-p_m)^(j-1)

and under mutation plus binomial crossover with probability

  s0j = (1/n) [(n-j+1) + (j-1) C_R - n q_m C_R]
        C_R^(n-j) q_m^(n-j+1) (1 - q_m C_R)^(j-2)

for j >= 2, and s01 = q_m^n C_R^(n-1). This module finds the rates that
maximize them.
"""

import collections
import enum
import logging

from scipy import optimize

from .errors import DomainError

log = logging.getLogger(__name__)

# Tolerance of the bounded scalar optimizer on the argument.
XATOL = 1e-10
# s0j_max must beat p0j by this relative margin to count as an improvement.
STRICT_MARGIN = 1e-9


class Regime(enum.Enum):
  """Where the optimal crossover rate sits."""
  # j = 1: s01 increases in C_R, supremum at the boundary C_R = 1.
  BOUNDARY = "boundary"
  # C_R = 1 is optimal and crossover cannot beat mutation.
  NO_GAIN = "no-gain"
  # Interior optimum with a closed form (j = 2 or j = n).
  INTERIOR_CLOSED_FORM = "interior-closed-form"
  # Interior optimum found numerically (3 <= j <= n-1).
  INTERIOR_NUMERIC = "interior-numeric"
  # s0j decreases in C_R; supremum as C_R -> 0.
  DECREASING = "decreasing"


def _check_level(n, j):
  if n < 2:
    raise DomainError("n must be at least 2, got %r" % (n,))
  if not 1 <= j <= n:
    raise DomainError("level j = %r outside [1, %d]" % (j, n))


def p0j(n, j, p_m):
  """Probability that mutation jumps from level j to the optimum."""
  _check_level(n, j)
  if not 0 < p_m < 1:
    raise DomainError("p_m must lie in (0, 1), got %r" % (p_m,))
  return p_m ** (n - j + 1) * (1.0 - p_m) ** (j - 1)


def s0j(n, j, C_R, q_m):
  """Probability that mutation plus crossover jumps from level j to the optimum.

  C_R = 0 is accepted as the limit of the formula.
  """
  _check_level(n, j)
  if not 0 < q_m < 1:
    raise DomainError("q_m must lie in (0, 1), got %r" % (q_m,))
  if not 0 <= C_R <= 1:
    raise DomainError("C_R must lie in [0, 1], got %r" % (C_R,))
  if j == 1:
    return q_m ** n * C_R ** (n - 1)
  bracket = (n - j + 1) + (j - 1) * C_R - n * q_m * C_R
  return (bracket / n * C_R ** (n - j) * q_m ** (n - j + 1) *
          (1.0 - q_m * C_R) ** (j - 2))


MutationOptimum = collections.namedtuple(
    "MutationOptimum", "p_star, p0j_max, boundary")


def optimal_mutation_rate(n, j):
  """Maximize p0j over p_m.

  At j = 1 the supremum 1 is only approached as p_m -> 1, which is reported
  with boundary=True.
  """
  _check_level(n, j)
  if j == 1:
    return MutationOptimum(1.0, 1.0, True)
  p_star = float(n - j + 1) / n
  return MutationOptimum(p_star, p0j(n, j, p_star), False)


def _maximize(f, candidates):
  """Maximize f on [0, 1] with a bounded Brent search plus candidate points.

  Returns:
    (argmax, max).
  """
  scale = max(f(c) for c in candidates) or 1.0
  result = optimize.minimize_scalar(
      lambda x: -f(x) / scale, bounds=(0.0, 1.0), method="bounded",
      options={"xatol": XATOL})
  best_x, best_f = float(result.x), f(float(result.x))
  for c in candidates:
    value = f(c)
    if value > best_f:
      best_x, best_f = c, value
  return best_x, best_f


def numeric_mutation_optimum(n, j):
  """Independent numeric maximization of p0j over p_m in (0, 1)."""
  _check_level(n, j)
  f = lambda p: p ** (n - j + 1) * (1.0 - p) ** (j - 1)
  return _maximize(f, [1e-12, 1.0 - 1e-12])


def numeric_crossover_optimum(n, j, q_m, candidates=()):
  """Numeric maximization of s0j over C_R in [0, 1]."""
  f = lambda c: s0j(n, j, c, q_m)
  return _maximize(f, [0.0, 1.0] + [c for c in candidates if 0 <= c <= 1])


def coarse_threshold(n, j):
  """q_m above which crossover is stated to improve on mutation at level j.

  None at j = 1, where it never does.
  """
  _check_level(n, j)
  if j == 1:
    return None
  if j == 2:
    return float(n - 1) / n
  if j == n:
    return 1.0 / n
  return float(n - j) / (n - 1)


def exact_threshold(n, j):
  """q_m above which max s0j > p0j strictly.

  log s0j is concave in C_R, so an improvement exists exactly when its
  derivative at C_R = 1 is negative.
  """
  _check_level(n, j)
  return float(n * (n - j) + j - 1) / (n * (n - 1))


CrossoverOptimum = collections.namedtuple(
    "CrossoverOptimum", "C_star, s0j_max, regime, bracket")


def _interior_bracket(n, j, q_m):
  lo = float(n - j) / ((n - 1) * q_m)
  hi = float(n - j + 1) / ((n - 1) * q_m)
  return (min(lo, 1.0), min(hi, 1.0))


def optimal_crossover_rate(n, j, q_m):
  """Maximize s0j over C_R in [0, 1] for a fixed q_m.

  Args:
    n: bitstring dimension.
    j: the source level, 1..n.
    q_m: the mutation rate, in (0, 1).

  Returns:
    A CrossoverOptimum. `bracket` is the interval known to contain an
    interior optimum for 3 <= j <= n-1, otherwise None.
  """
  _check_level(n, j)
  if not 0 < q_m < 1:
    raise DomainError("q_m must lie in (0, 1), got %r" % (q_m,))
  bracket = None
  if j == 1:
    C_star, regime = 1.0, Regime.BOUNDARY
  elif j == 2:
    if q_m <= float(n - 1) / n:
      C_star, regime = 1.0, Regime.NO_GAIN
    else:
      C_star = float(n - 2) / (n * q_m - 1)
      regime = (Regime.DECREASING if C_star == 0
                else Regime.INTERIOR_CLOSED_FORM)
  elif j == n:
    if q_m <= 1.0 / n:
      C_star, regime = 1.0, Regime.NO_GAIN
    elif q_m < 0.5:
      C_star = (1.0 - 2 * q_m) / (q_m * (n - 1 - n * q_m))
      regime = Regime.INTERIOR_CLOSED_FORM
    else:
      C_star, regime = 0.0, Regime.DECREASING
  else:
    bracket = _interior_bracket(n, j, q_m)
    C_star, _ = numeric_crossover_optimum(n, j, q_m, bracket)
    if q_m <= exact_threshold(n, j) or C_star >= 1.0:
      C_star, regime = 1.0, Regime.NO_GAIN
    else:
      regime = Regime.INTERIOR_NUMERIC
  optimum = CrossoverOptimum(C_star, s0j(n, j, C_star, q_m), regime, bracket)
  log.debug("optimal C_R for n=%d j=%d q_m=%r: %r", n, j, q_m, optimum)
  return optimum


class EscapeAnalysis(object):
  """Optimal rates for escaping level j to the optimum.

  Attributes:
    n, j, q_m: the inputs.
    optimal_p_m, p0j_max: the best mutation rate and its escape probability.
    p0j: the escape probability of mutation at p_m = q_m.
    optimal_C_R, s0j_max, regime: the best crossover rate for this q_m.
  """

  def __init__(self, n, j, q_m):
    self.n = n
    self.j = j
    self.q_m = q_m
    mutation = optimal_mutation_rate(n, j)
    self.optimal_p_m = mutation.p_star
    self.p0j_max = mutation.p0j_max
    self.p0j = p0j(n, j, q_m)
    crossover = optimal_crossover_rate(n, j, q_m)
    self.optimal_C_R = crossover.C_star
    self.s0j_max = crossover.s0j_max
    self.regime = crossover.regime

  @property
  def strict_improvement(self):
    return self.s0j_max > self.p0j * (1.0 + STRICT_MARGIN)

  def row(self):
    """The `optima` CSV row for this analysis."""
    return collections.OrderedDict([
        ("n", self.n), ("j", self.j), ("q_m", self.q_m),
        ("p0j", self.p0j), ("p_star", self.optimal_p_m),
        ("p0j_max", self.p0j_max), ("cr_star", self.optimal_C_R),
        ("s0j_max", self.s0j_max), ("regime", self.regime.value),
        ("strict_improvement", self.strict_improvement),
    ])


class Theorem9Verdict(object):
  """Whether crossover strictly improves the escape, against both thresholds.

  Attributes:
    strict: max over C_R of s0j exceeds p0j at p_m = q_m.
    coarse_predicts, exact_predicts: what the coarse and the exact threshold
      classifications say about `strict`.
  """

  def __init__(self, n, j, q_m, strict):
    self.n = n
    self.j = j
    self.q_m = q_m
    self.strict = strict
    self.coarse_threshold = coarse_threshold(n, j)
    self.exact_threshold = exact_threshold(n, j)
    self.coarse_predicts = (self.coarse_threshold is not None and
                            q_m > self.coarse_threshold)
    self.exact_predicts = q_m > self.exact_threshold

  @property
  def agrees_with_coarse(self):
    return self.strict == self.coarse_predicts

  @property
  def agrees_with_exact(self):
    return self.strict == self.exact_predicts

  def __bool__(self):
    return self.strict

  def __repr__(self):
    return ("Theorem9Verdict(n=%d, j=%d, q_m=%r, strict=%r, coarse=%r, "
            "exact=%r)" % (self.n, self.j, self.q_m, self.strict,
                           self.coarse_predicts, self.exact_predicts))


def theorem9_verdict(n, j, q_m):
  """Classify whether tuning C_R beats plain mutation at p_m = q_m.

  The verdict comes from numeric maximization; it is then checked against
  the threshold classifications.
  """
  _check_level(n, j)
  if not 0 < q_m < 1:
    raise DomainError("q_m must lie in (0, 1), got %r" % (q_m,))
  baseline = p0j(n, j, q_m)
  candidates = []
  if 3 <= j <= n - 1:
    candidates = list(_interior_bracket(n, j, q_m))
  _, best = numeric_crossover_optimum(n, j, q_m, candidates)
  verdict = Theorem9Verdict(n, j, q_m, best > baseline * (1.0 + STRICT_MARGIN))
  if not verdict.agrees_with_exact:
    log.warning("numeric verdict disagrees with the exact threshold: %r",
                verdict)
  return verdict
