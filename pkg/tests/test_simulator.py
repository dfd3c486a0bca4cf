"""Tests for the Monte Carlo simulator."""

import logging

import numpy as np
from scipy import stats

from levelchain import chain
from levelchain import kernels
from levelchain import problems
from levelchain import simulator
from levelchain import transitions
from levelchain.errors import ConfigurationError, DomainError
from tests import chaintest


def flip_count_frequencies(kernel, rng, size):
    masks = simulator.flip_masks(kernel, rng, size)
    return np.bincount(masks.sum(axis=1), minlength=kernel.n + 1)


class TestAdaptParameters(chaintest.ChainTestCase):

    def test_mutation(self):
        state = simulator.AdaptiveState(0.1, None, None)
        new = simulator.adapt_parameters(state, 2, 10, kernels.Variant("ea"))
        self.assertClose(new.p_m, 0.3)

    def test_crossover(self):
        state = simulator.AdaptiveState(None, 0.5, 0.2)
        new = simulator.adapt_parameters(state, 1, 10, kernels.Variant("eac"))
        self.assertClose(new.q_m, 0.6)
        self.assertClose(new.C_R, (0.1 + 1.0 / 9) / 0.6)

    def test_clamped(self):
        state = simulator.AdaptiveState(None, 0.95, 0.9)
        new = simulator.adapt_parameters(state, 5, 10, kernels.Variant("eac"))
        self.assertClose(new.q_m, 0.99)
        self.assertEqual(new.C_R, 1.0)

    def test_zero_distance_is_ignored(self):
        state = simulator.AdaptiveState(0.1, None, None)
        logger = logging.getLogger("levelchain.simulator")
        with self.assertLogs(logger, level="WARNING"):
            new = simulator.adapt_parameters(state, 0, 10,
                                             kernels.Variant("ea"))
        self.assertEqual(new, state)

    def test_negative_distance(self):
        state = simulator.AdaptiveState(0.1, None, None)
        with self.assertRaises(DomainError):
            simulator.adapt_parameters(state, -1, 10, kernels.Variant("ea"))


class TestSteps(chaintest.ChainTestCase):

    def test_elitism_at_optimum(self):
        problem = problems.onemax(6)
        rng = simulator.make_rng(1, 0)
        x = np.ones(6, dtype=bool)
        for _ in range(200):
            step = simulator.step_ea(problem, x, 0.5, rng)
            self.assertEqual(step.level, 0)
            self.assertTrue(np.all(step.x))

    def test_rejected_step_keeps_parent(self):
        problem = problems.onemax(8)
        rng = simulator.make_rng(2, 0)
        x = np.zeros(8, dtype=bool)
        x[:6] = True
        for _ in range(200):
            step = simulator.step_ea_c(problem, x, 0.4, 0.5, rng)
            self.assertLessEqual(step.level, 2)
            if not step.accepted:
                self.assertTrue(np.array_equal(step.x, x))
                self.assertEqual(step.level, 2)
            else:
                self.assertEqual(step.level, 8 - int(step.x.sum()))
                self.assertEqual(step.hamming, int((step.x != x).sum()))

    def test_vanishing_crossover_changes_one_bit(self):
        kernel = kernels.crossover_kernel(10, 0.9, 1e-12)
        masks = simulator.flip_masks(kernel, simulator.make_rng(6, 0), 5000)
        self.assertLessEqual(masks.sum(axis=1).max(), 1)

    def test_mutation_flip_counts(self):
        n, p, size = 6, 0.3, 40000
        counts = flip_count_frequencies(kernels.mutation_kernel(n, p),
                                        simulator.make_rng(3, 0), size)
        expected = stats.binom.pmf(np.arange(n + 1), n, p) * size
        self.assertGreater(stats.chisquare(counts, expected).pvalue, 1e-4)

    def test_crossover_flip_counts(self):
        n, q, cr, size = 5, 0.5, 0.4, 50000
        kernel = kernels.crossover_kernel(n, q, cr)
        counts = flip_count_frequencies(kernel, simulator.make_rng(4, 0), size)
        table = kernel.table()
        expected = np.array([problems.binomial(n, l) * table[l]
                             for l in range(n + 1)]) * size
        expected *= size / expected.sum()
        self.assertGreater(stats.chisquare(counts, expected).pvalue, 1e-4)

    def test_full_crossover_flips_like_mutation(self):
        n, q, size = 6, 0.3, 40000
        counts = flip_count_frequencies(kernels.crossover_kernel(n, q, 1.0),
                                        simulator.make_rng(5, 0), size)
        expected = stats.binom.pmf(np.arange(n + 1), n, q) * size
        self.assertGreater(stats.chisquare(counts, expected).pvalue, 1e-4)


class TestSampleTransitions(chaintest.ChainTestCase):

    def _check_column(self, problem, kernel, level, seed):
        steps = 100000
        counts = simulator.sample_transitions(
            problem, kernel, level, steps, simulator.make_rng(seed, 0))
        self.assertEqual(counts.sum(), steps)
        column = transitions.build_for_problem(problem, kernel).r[:, level]
        freq = counts / float(steps)
        se = np.sqrt(column * (1 - column) / steps)
        self.assertTrue(np.all(np.abs(freq - column) <= 5 * se + 1e-12),
                        (freq, column))

    def test_onemax_mutation(self):
        self._check_column(problems.onemax(6),
                           kernels.mutation_kernel(6, 1.0 / 6), 3, 10)

    def test_deceptive_crossover(self):
        self._check_column(problems.deceptive(6),
                           kernels.crossover_kernel(6, 0.6, 0.5), 4, 11)


class TestSimConfig(chaintest.ChainTestCase):

    def test_coupled_rate_sets_crossover(self):
        config = simulator.SimConfig(problems.onemax(10), "eac", q_m=0.5,
                                     p=0.1)
        self.assertClose(config.C_R, 0.2)
        self.assertEqual(config.as_dict()["algorithm"], "eac")

    def test_mutation_takes_coupled_rate(self):
        config = simulator.SimConfig(problems.onemax(10), "ea", p=0.1)
        self.assertEqual(config.p_m, 0.1)

    def test_rejects(self):
        problem = problems.onemax(5)
        with self.assertRaises(ConfigurationError):
            simulator.SimConfig(problem, "ga", p_m=0.1)
        with self.assertRaises(ConfigurationError):
            simulator.SimConfig(problem, "ea", p_m=0.1, engine="warp")
        with self.assertRaises(ConfigurationError):
            simulator.SimConfig(problem, "ea", p_m=0.1, workers=0)
        with self.assertRaises(DomainError):
            simulator.SimConfig(problem, "ea", p_m=0.1, tails=(6,))
        with self.assertRaises(DomainError):
            simulator.SimConfig(problem, "ea", p_m=0.1, runs=0)
        with self.assertRaises(DomainError):
            simulator.SimConfig(problem, "eac", q_m=0.5, C_R=0.0)

    def test_coupled_rate_must_agree(self):
        problem = problems.onemax(10)
        with self.assertRaises(ConfigurationError):
            simulator.SimConfig(problem, "ea", p_m=0.2, p=0.1)
        with self.assertRaises(ConfigurationError):
            simulator.SimConfig(problem, "eac", q_m=0.5, C_R=0.5, p=0.1)
        config = simulator.SimConfig(problem, "eac", q_m=0.4, C_R=0.25, p=0.1)
        self.assertEqual(config.C_R, 0.25)
        self.assertEqual(simulator.SimConfig(problem, "ea", p_m=0.1,
                                             p=0.1).p_m, 0.1)

    def test_rejects_non_bijective_problem(self):
        problem = problems.LevelProblem(problems.ProblemKind.CUSTOM, 2,
                                        [0, 1, 2], [0, 0, 1])
        with self.assertRaises(ConfigurationError):
            simulator.SimConfig(problem, "ea", p_m=0.1)


class TestOccupancy(chaintest.ChainTestCase):

    def test_counts(self):
        occupancy = simulator.Occupancy(3, 3)
        occupancy.add(np.array([3, 3, 1, 0]))
        occupancy.add(np.array([2, 2, 2, 2]))
        self.assertArrayClose(occupancy.counts, [[0, 0, 1, 1],
                                                 [0, 0, 1, 1],
                                                 [0, 1, 1, 0],
                                                 [1, 0, 1, 0]])
        self.assertEqual(occupancy.runs, 2)

    def test_merge(self):
        a, b = simulator.Occupancy(2, 2), simulator.Occupancy(2, 2)
        a.add(np.array([2, 1, 1]))
        b.add(np.array([1, 1, 0]))
        a.merge(b)
        self.assertArrayClose(a.counts, [[0, 1, 1], [0, 2, 0], [1, 1, 0]])


class TestMonteCarlo(chaintest.ChainTestCase):

    def _config(self, **kwargs):
        settings = dict(problem=problems.onemax(8), algorithm="ea",
                        p_m=1.0 / 8, horizon=60, runs=600, base_seed=7)
        settings.update(kwargs)
        return simulator.SimConfig(**settings)

    def test_deterministic(self):
        a = simulator.monte_carlo(self._config())
        b = simulator.monte_carlo(self._config())
        self.assertTrue(np.array_equal(a.occupancy.counts, b.occupancy.counts))

    def test_workers_do_not_change_results(self):
        a = simulator.monte_carlo(self._config())
        b = simulator.monte_carlo(self._config(workers=2))
        self.assertTrue(np.array_equal(a.occupancy.counts, b.occupancy.counts))
        self.assertArrayClose(a.series.eae, b.series.eae, atol=0)

    def test_seed_changes_results(self):
        a = simulator.monte_carlo(self._config())
        b = simulator.monte_carlo(self._config(base_seed=8))
        self.assertFalse(np.array_equal(a.occupancy.counts, b.occupancy.counts))

    def test_single_run_no_generations(self):
        result = simulator.monte_carlo(self._config(runs=1, horizon=0))
        self.assertEqual(result.series.horizon, 0)
        self.assertEqual(result.eae_se[0], 0.0)
        self.assertEqual(result.runs, 1)

    def test_level_frequencies(self):
        result = simulator.monte_carlo(self._config())
        for t in (0, 30, 60):
            self.assertClose(result.level_frequencies(t).sum(), 1.0)

    def _check_against_exact(self, config, kernel, checkpoints):
        result = simulator.monte_carlo(config)
        problem = config.problem
        matrix = transitions.build_for_problem(problem, kernel)
        q = chain.iterate(matrix, problems.initial_distribution(problem),
                          config.horizon).q
        checked = [("eae", problem.error_vector, result.series.eae)]
        for i in config.tails:
            checked.append(("tp_%d" % i, chain.tail_error_vector(problem.L, i),
                            result.series.tails[i]))
        N = float(config.runs)
        for name, weights, empirical in checked:
            for t in checkpoints:
                mean = q[t].dot(weights)
                variance = max(q[t].dot(weights * weights) - mean * mean, 0.0)
                se = np.sqrt(variance / N)
                # Counts are integers: allow one run's worth on top of 3 SE.
                self.assertLessEqual(abs(empirical[t] - mean), 3 * se + 1 / N,
                                     (name, t, empirical[t], mean, se))

    def test_jump_engine_matches_exact_chain(self):
        config = self._config(runs=2000, horizon=100, tails=(1, 4))
        self._check_against_exact(config, kernels.mutation_kernel(8, 1.0 / 8),
                                  (5, 20, 100))

    def test_jump_engine_crossover_on_deceptive(self):
        config = self._config(problem=problems.deceptive(6), algorithm="eac",
                              p_m=None, q_m=0.5, C_R=0.6, runs=2000,
                              horizon=80, tails=(1, 3))
        self._check_against_exact(config, kernels.crossover_kernel(6, 0.5, 0.6),
                                  (5, 20, 80))

    def test_jump_engine_long_horizon_on_deceptive(self):
        n = 12
        mutation = self._config(problem=problems.deceptive(n), p_m=1.0 / n,
                                runs=4000, horizon=10 ** 4, tails=(1, 6),
                                base_seed=21)
        self._check_against_exact(mutation, kernels.mutation_kernel(n, 1.0 / n),
                                  (100, 1000, 10000))
        crossover = self._config(problem=problems.deceptive(n),
                                 algorithm="eac", p_m=None, q_m=0.5,
                                 C_R=2.0 / n, runs=4000, horizon=10 ** 4,
                                 tails=(1, 6), base_seed=22)
        self._check_against_exact(crossover,
                                  kernels.crossover_kernel(n, 0.5, 2.0 / n),
                                  (100, 1000, 10000))

    def test_bitstring_engine_matches_exact_chain(self):
        config = self._config(engine="bitstring", runs=500, horizon=60)
        self._check_against_exact(config, kernels.mutation_kernel(8, 1.0 / 8),
                                  (5, 20, 60))

    def test_engines_agree_when_adaptive(self):
        settings = dict(algorithm="eac", p_m=None, q_m=0.2, C_R=0.5,
                        adaptive=True, runs=1000, horizon=40)
        jump = simulator.monte_carlo(self._config(**settings))
        bits = simulator.monte_carlo(self._config(engine="bitstring",
                                                  base_seed=9, **settings))
        for t in (10, 20, 40):
            gap = abs(jump.series.tails[1][t] - bits.series.tails[1][t])
            se = np.hypot(jump.tails_se[1][t], bits.tails_se[1][t])
            self.assertLessEqual(gap, 3 * se + 2.0 / 1000)
