"""Tests for the transition matrix builders."""

import hypothesis
from hypothesis import strategies as st
import numpy as np

from levelchain import kernels
from levelchain import problems
from levelchain import transitions
from levelchain.errors import (ConfigurationError, EnumerationLimitError,
                               InvalidMatrixError)
from tests import chaintest


class TestTransitionMatrix(chaintest.ChainTestCase):

    def test_rejects_lower_entries(self):
        with self.assertRaises(InvalidMatrixError):
            transitions.TransitionMatrix([[0.5, 0.0], [0.5, 1.0]])

    def test_rejects_bad_column_sum(self):
        with self.assertRaises(InvalidMatrixError):
            transitions.TransitionMatrix([[1.0, 0.2], [0.0, 0.7]])

    def test_rejects_non_square(self):
        with self.assertRaises(InvalidMatrixError):
            transitions.TransitionMatrix([[1.0, 0.2, 0.1]])

    def test_clamps_rounding_noise(self):
        m = transitions.TransitionMatrix([[1.0, 1.0 + 2.5e-16], [0.0, -1e-16]])
        self.assertEqual(m.r[1, 1], 0.0)
        self.assertEqual(m.r[0, 1], 1.0)

    def test_residue_below_tolerance(self):
        with self.assertRaises(InvalidMatrixError):
            transitions.TransitionMatrix.from_offdiagonal(
                [[0.0, 0.6, 0.5], [0.0, 0.0, 0.6], [0.0, 0.0, 0.0]])

    def test_from_offdiagonal_fills_diagonal(self):
        m = transitions.TransitionMatrix.from_offdiagonal(
            [[0.0, 0.25], [0.0, 0.0]])
        self.assertArrayClose(m.r, [[1.0, 0.25], [0.0, 0.75]])
        self.assertClose(m.escape(1), 0.25)

    def test_read_only(self):
        m = transitions.counterexample_pair(4)[0]
        with self.assertRaises(ValueError):
            m.r[0, 1] = 0.5


class TestBuilders(chaintest.ChainTestCase):

    def test_onemax_stochastic(self):
        for n in (2, 5, 30):
            for kernel in (kernels.mutation_kernel(n, 1.0 / n),
                           kernels.crossover_kernel(n, 0.5, 0.5)):
                self.assertStochastic(transitions.build_onemax(n, kernel))

    def test_deceptive_stochastic(self):
        for n in (2, 5, 30):
            for kernel in (kernels.mutation_kernel(n, 1.0 / n),
                           kernels.crossover_kernel(n, 0.5, 2.0 / n)):
                self.assertStochastic(transitions.build_deceptive(n, kernel))

    def test_small_examples(self):
        m = transitions.build_onemax(2, kernels.mutation_kernel(2, 0.5))
        self.assertClose(m.r[0, 1], 0.25)
        kernel = kernels.mutation_kernel(3, 1.0 / 3)
        d = transitions.build_deceptive(3, kernel)
        self.assertClose(d.r[0, 3], 4.0 / 27)
        self.assertClose(d.r[0, 1], kernels.p1_flip(3, kernel))

    def test_onemax_columns_decrease(self):
        n = 12
        for kernel in (kernels.mutation_kernel(n, 1.0 / n),
                       kernels.coupled_kernel(n, 1.0 / n, 0.4)):
            r = transitions.build_onemax(n, kernel).r
            for j in range(1, n):
                for i in range(j):
                    self.assertLessEqual(r[i, j + 1], r[i, j] + 1e-15)

    def test_optimum_absorbing(self):
        m = transitions.build_onemax(6, kernels.mutation_kernel(6, 0.3))
        self.assertEqual(m.r[0, 0], 1.0)

    def test_kernel_dimension_mismatch(self):
        with self.assertRaises(ConfigurationError):
            transitions.build_onemax(5, kernels.mutation_kernel(4, 0.2))

    def test_deceptive_escape_is_single_pattern(self):
        n, p = 7, 0.2
        m = transitions.build_deceptive(n, kernels.mutation_kernel(n, p))
        for j in range(1, n + 1):
            self.assertClose(m.r[0, j], p ** (n - j + 1) * (1 - p) ** (j - 1))

    def test_closed_forms_match_level_map(self):
        for n in (3, 8, 15):
            for kernel in (kernels.mutation_kernel(n, 0.15),
                           kernels.crossover_kernel(n, 0.4, 0.3)):
                self.assertMatrixClose(
                    transitions.build_onemax(n, kernel),
                    transitions.build_from_level_map(problems.onemax(n), kernel))
                self.assertMatrixClose(
                    transitions.build_deceptive(n, kernel),
                    transitions.build_from_level_map(problems.deceptive(n),
                                                     kernel))

    def test_dispatch(self):
        kernel = kernels.mutation_kernel(4, 0.25)
        custom = problems.custom(4, [0, 1, 2, 3, 4], [4, 3, 2, 1, 0])
        self.assertMatrixClose(transitions.build_for_problem(custom, kernel),
                               transitions.build_onemax(4, kernel))


class TestOracle(chaintest.ChainTestCase):

    def test_mutation(self):
        for n in range(4, 9):
            kernel = kernels.mutation_kernel(n, 1.0 / n)
            self.assertMatrixClose(
                transitions.build_onemax(n, kernel),
                transitions.bruteforce_transition(n, problems.onemax(n), kernel))
            self.assertMatrixClose(
                transitions.build_deceptive(n, kernel),
                transitions.bruteforce_transition(n, problems.deceptive(n),
                                                  kernel))

    def test_crossover(self):
        for n in (4, 5):
            for q, cr in ((0.5, 0.5), (0.3, 0.8), (0.9, 0.2)):
                kernel = kernels.crossover_kernel(n, q, cr)
                self.assertMatrixClose(
                    transitions.build_onemax(n, kernel),
                    transitions.bruteforce_transition(n, problems.onemax(n),
                                                      kernel))
                self.assertMatrixClose(
                    transitions.build_deceptive(n, kernel),
                    transitions.bruteforce_transition(n, problems.deceptive(n),
                                                      kernel))

    def test_representative_does_not_matter(self):
        kernel = kernels.crossover_kernel(5, 0.4, 0.6)
        problem = problems.deceptive(5)
        self.assertMatrixClose(
            transitions.bruteforce_transition(5, problem, kernel, "leading"),
            transitions.bruteforce_transition(5, problem, kernel, "trailing"))

    def test_custom_problem(self):
        problem = problems.custom(4, [0, 1, 3, 6, 10], [2, 4, 0, 1, 3])
        kernel = kernels.crossover_kernel(4, 0.35, 0.45)
        self.assertMatrixClose(
            transitions.build_from_level_map(problem, kernel),
            transitions.bruteforce_transition(4, problem, kernel))

    def test_limits(self):
        with self.assertRaises(EnumerationLimitError):
            transitions.bruteforce_transition(
                9, problems.onemax(9), kernels.mutation_kernel(9, 0.1))
        with self.assertRaises(EnumerationLimitError):
            transitions.bruteforce_transition(
                6, problems.onemax(6), kernels.crossover_kernel(6, 0.5, 0.5))


class TestCounterexample(chaintest.ChainTestCase):

    def test_entries(self):
        n = 10
        R, S = transitions.counterexample_pair(n)
        for j in range(1, n + 1):
            self.assertClose(R.r[0, j], j / float(n) ** 3)
            self.assertClose(S.r[0, j], 2 * j / float(n) ** 3)
        for j in range(2, n + 1):
            self.assertClose(R.r[j - 1, j], (j - 1) / float(n) ** 2)
            self.assertClose(S.r[j - 1, j],
                             (j - 1) * (1.0 / n ** 2 + 1.0 / (2 * n)))

    def test_diagonals(self):
        R, S = transitions.counterexample_pair(4)
        self.assertClose(S.r[2, 2], 0.75)
        self.assertClose(R.r[4, 4], 0.75)
        self.assertClose(R.r[1, 1], 1 - 1.0 / 64)

    def test_s_dominates_r(self):
        R, S = transitions.counterexample_pair(10)
        self.assertTrue(transitions.dominates(S, R))
        self.assertFalse(transitions.dominates(R, S))


class TestDominance(chaintest.ChainTestCase):

    def _pair(self, problem, n, p, cr):
        P = transitions.build_for_problem(problem, kernels.mutation_kernel(n, p))
        S = transitions.build_for_problem(problem,
                                          kernels.coupled_kernel(n, p, cr))
        return P, S

    def test_crossover_dominates_mutation(self):
        for n in (3, 10, 25):
            for p in (1.0 / n ** 2, 1.0 / (2 * n), 1.0 / n):
                for cr in (0.1, 0.5, 0.9):
                    if p >= cr:
                        continue
                    for problem in (problems.onemax(n), problems.deceptive(n)):
                        P, S = self._pair(problem, n, p, cr)
                        result = transitions.dominates(S, P)
                        self.assertTrue(result, (n, p, cr, result))

    @chaintest.slow
    def test_crossover_dominates_mutation_full_grid(self):
        for n in range(3, 51):
            for p in (1.0 / n ** 2, 1.0 / (2 * n), 1.0 / n):
                for cr in chaintest.CR_GRID:
                    if p >= cr:
                        continue
                    for problem in (problems.onemax(n), problems.deceptive(n)):
                        P, S = self._pair(problem, n, p, cr)
                        self.assertTrue(transitions.dominates(S, P),
                                        (problem.kind, n, p, cr))

    @hypothesis.settings(max_examples=60, deadline=None)
    @hypothesis.given(st.integers(3, 20), st.floats(0.1, 1.0),
                      st.floats(0.05, 0.95))
    def test_dominance_property(self, n, fraction, cr):
        p = fraction / n
        hypothesis.assume(p < cr)
        P, S = self._pair(problems.onemax(n), n, p, cr)
        self.assertTrue(transitions.dominates(S, P))

    def test_reflexive_is_not_strict(self):
        P = transitions.build_onemax(5, kernels.mutation_kernel(5, 0.2))
        result = transitions.dominates(P, P)
        self.assertFalse(result)
        self.assertIsNone(result.violation)
        self.assertIsNone(result.strict)

    def test_witness_of_violation(self):
        R, S = transitions.counterexample_pair(5)
        result = transitions.dominates(R, S)
        self.assertEqual(result.violation, (0, 1))
        self.assertEqual(result.witness(), (0, 1))

    def test_size_mismatch(self):
        with self.assertRaises(ConfigurationError):
            transitions.dominates(*[transitions.counterexample_pair(n)[0]
                                    for n in (3, 4)])


class TestOrderingConditions(chaintest.ChainTestCase):

    def test_identical_chains_satisfy_first_two(self):
        P = transitions.build_onemax(6, kernels.mutation_kernel(6, 1.0 / 6))
        report = transitions.lemma3_conditions(P, P)
        self.assertTrue(report.conC1.holds)
        self.assertTrue(report.conC2.holds)

    def test_counterexample_fails_a_condition(self):
        R, S = transitions.counterexample_pair(10)
        report = transitions.lemma3_conditions(S, R)
        self.assertFalse(report.holds)
        failed = [name for name, c in report.as_dict().items()
                  if not c["holds"]]
        self.assertTrue(failed)
        for name in failed:
            self.assertIsNotNone(report.as_dict()[name]["first_violation"])

    def test_onemax_conditions(self):
        n, p = 10, 0.1
        P = transitions.build_onemax(n, kernels.mutation_kernel(n, p))
        S = transitions.build_onemax(n, kernels.coupled_kernel(n, p, 0.5))
        report = transitions.lemma3_conditions(S, P)
        self.assertTrue(report.holds, report.as_dict())
        self.assertTrue(np.all(np.diag(P.r) >= np.diag(S.r) - 1e-15))
