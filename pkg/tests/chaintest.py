"""Testing tools for levelchain."""

import itertools
import os
import unittest

import numpy as np

from levelchain import kernels

SLOW_TESTS_VARIABLE = "LEVELCHAIN_SLOW_TESTS"

# Full parameter grids take minutes; they run only when asked for.
slow = unittest.skipUnless(
    os.environ.get(SLOW_TESTS_VARIABLE),
    "set %s=1 to run the full grids" % SLOW_TESTS_VARIABLE)

CR_GRID = [round(0.1 * k, 1) for k in range(1, 10)]


class ChainTestCase(unittest.TestCase):
    """Base class with tolerance assertions for arrays and matrices."""

    def assertClose(self, actual, expected, atol=1e-12, msg=None):
        self.assertLessEqual(
            abs(actual - expected), atol,
            msg or "%r != %r within %g" % (actual, expected, atol))

    def assertArrayClose(self, actual, expected, atol=1e-12):
        actual, expected = np.asarray(actual), np.asarray(expected)
        self.assertEqual(actual.shape, expected.shape)
        worst = np.max(np.abs(actual - expected)) if actual.size else 0.0
        self.assertLessEqual(worst, atol,
                             "arrays differ by %g > %g" % (worst, atol))

    def assertMatrixClose(self, A, B, atol=1e-12):
        self.assertArrayClose(A.r, B.r, atol)

    def assertNonIncreasing(self, series, slack=1e-12):
        diffs = np.diff(np.asarray(series))
        self.assertTrue(np.all(diffs <= slack),
                        "series increases by %g" % (diffs.max(),))

    def assertStochastic(self, matrix, atol=1e-12):
        self.assertArrayClose(matrix.r.sum(axis=0), np.ones(matrix.L + 1), atol)
        self.assertTrue(np.all(np.tril(matrix.r, -1) == 0))


def _bits(n):
    return list(itertools.product((0, 1), repeat=n))


def _mask_probability(mask, rate):
    k = sum(mask)
    return rate ** k * (1 - rate) ** (len(mask) - k)


def flip_pattern_distribution(kernel):
    """Probability of every exact flip pattern, by plain enumeration.

    Returns:
      A dict from a tuple of 0/1 flags to its probability.
    """
    n = kernel.n
    table = dict((pattern, 0.0) for pattern in _bits(n))
    if kernel.variant is kernels.Variant.MUTATION_ONLY:
        for mask in _bits(n):
            table[mask] += _mask_probability(mask, kernel.p_m)
        return table
    for mutation in _bits(n):
        pm = _mask_probability(mutation, kernel.q_m)
        for crossover in _bits(n):
            pc = _mask_probability(crossover, kernel.C_R)
            for forced in range(n):
                pattern = tuple(
                    mutation[i] & (crossover[i] | (i == forced))
                    for i in range(n))
                table[pattern] += pm * pc / n
    return table


def one_step_expected_error(problem, kernel):
    """E[e(x_1)] from a uniformly random x_0, by enumeration of (x, flips)."""
    n = problem.n
    patterns = flip_pattern_distribution(kernel)
    total = 0.0
    for x in _bits(n):
        level_x = problem.level(sum(x))
        for pattern, weight in patterns.items():
            y = [a ^ b for a, b in zip(x, pattern)]
            level_y = problem.level(sum(y))
            level = level_y if level_y <= level_x else level_x
            total += weight * problem.error_vector[level] / 2.0 ** n
    return total
