"""Monte Carlo execution of the (1+1) EA and the (1+1) EA with crossover.

Two engines produce per-run traces of the incumbent's error level:

  bitstring: runs the algorithms generation by generation on boolean arrays.
  jump: samples the ones-count chain event by event. Between two strict
    improvements the parameters are fixed, so the wait is geometric in the
    column's escape probability and only the improving move itself needs to
    be drawn.

Both support the Hamming-distance adaptive parameter update. Runs are
seeded from (base_seed, run index) and reduced in run order, so results do
not depend on the number of workers.
"""

import collections
import concurrent.futures
import logging
import math
import reprlib

import numpy as np

from . import chain
from . import kernels
from . import transitions
from .errors import ConfigurationError, DomainError

log = logging.getLogger(__name__)

repr_obj = reprlib.Repr()
repr_obj.maxother = 120
repper = repr_obj.repr

ENGINES = ("jump", "bitstring")
# Runs per work unit; fixed so the reduction order never changes.
CHUNK_SIZE = 250


def make_rng(base_seed, run):
    """The random stream of one run."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(base_seed, spawn_key=(run,))))


class SimConfig(object):
    """Everything a Monte Carlo experiment depends on.

    For the crossover algorithm either C_R or the coupled rate p may be
    given; p fixes C_R = p / q_m. For plain mutation p stands in for p_m.

    Attributes:
      problem: a bijective LevelProblem.
      algorithm: a kernels.Variant.
      p_m, q_m, C_R: initial operator parameters.
      p: the coupled rate, when one was given.
      adaptive: whether the Hamming-distance update is applied.
      horizon, runs, base_seed: the experiment size and seed.
      tails: tail indices to record.
      engine: "jump" or "bitstring".
      workers: worker processes; 1 runs in-process.
    """

    def __init__(self, problem, algorithm, p_m=None, q_m=None, C_R=None,
                 p=None, adaptive=False, horizon=1, runs=1, base_seed=0,
                 tails=(1,), engine="jump", workers=1):
        if not isinstance(algorithm, kernels.Variant):
            try:
                algorithm = kernels.Variant(algorithm)
            except ValueError:
                raise ConfigurationError("unknown algorithm %r" % (algorithm,))
        n = problem.n
        if algorithm is kernels.Variant.MUTATION_ONLY:
            if p_m is None:
                p_m = p
            kernels.check_coupled_rate(p, p_m)
            kernels.mutation_kernel(n, p_m)
        else:
            if C_R is None and p is not None and q_m is not None:
                C_R = p / q_m
            elif q_m is not None and C_R is not None:
                kernels.check_coupled_rate(p, q_m * C_R)
            kernels.crossover_kernel(n, q_m, C_R)
            if adaptive and n < 2:
                raise DomainError("adaptive crossover needs n >= 2")
        if horizon < 0:
            raise DomainError("horizon must be non-negative, got %r" % (horizon,))
        if runs < 1:
            raise DomainError("runs must be positive, got %r" % (runs,))
        if not 0 <= base_seed < 2 ** 64:
            raise DomainError("base_seed must be a 64-bit unsigned integer")
        if engine not in ENGINES:
            raise ConfigurationError("unknown engine %r" % (engine,))
        if workers < 1:
            raise ConfigurationError("workers must be positive, got %r" %
                                     (workers,))
        chain.check_tail_indices(problem.L, tails)
        problem.ones_of_level()
        self.problem = problem
        self.algorithm = algorithm
        self.p_m = p_m
        self.q_m = q_m
        self.C_R = C_R
        self.p = p
        self.adaptive = bool(adaptive)
        self.horizon = int(horizon)
        self.runs = int(runs)
        self.base_seed = int(base_seed)
        self.tails = tuple(int(i) for i in tails)
        self.engine = engine
        self.workers = int(workers)

    def initial_state(self):
        return AdaptiveState(self.p_m, self.q_m, self.C_R)

    def as_dict(self):
        return collections.OrderedDict([
            ("problem", self.problem.kind.value),
            ("n", self.problem.n),
            ("algorithm", self.algorithm.value),
            ("p_m", self.p_m), ("q_m", self.q_m), ("C_R", self.C_R),
            ("p", self.p), ("adaptive", self.adaptive),
            ("horizon", self.horizon), ("runs", self.runs),
            ("base_seed", self.base_seed), ("tails", list(self.tails)),
            ("engine", self.engine), ("workers", self.workers),
        ])

    def __repr__(self):
        return "SimConfig(%s)" % repper(dict(self.as_dict()))


AdaptiveState = collections.namedtuple("AdaptiveState", "p_m, q_m, C_R")


def state_kernel(state, n, algorithm):
    if algorithm is kernels.Variant.MUTATION_ONLY:
        return kernels.mutation_kernel(n, state.p_m)
    return kernels.crossover_kernel(n, state.q_m, state.C_R)


def adapt_parameters(state, H, n, algorithm):
    """Move the rates towards the Hamming distance of a successful step.

    p_m and q_m grow by H/n and stay within [1/n^2, 1 - 1/n^2]; C_R is reset
    so that C_R q_m grows by H/(n-1), capped at 1.
    """
    if H == 0:
        log.warning("adaptive update with H = 0 ignored")
        return state
    if H < 0:
        raise DomainError("Hamming distance must be non-negative, got %r" % (H,))
    lo, hi = 1.0 / n ** 2, 1.0 - 1.0 / n ** 2
    if algorithm is kernels.Variant.MUTATION_ONLY:
        return state._replace(p_m=min(max(state.p_m + float(H) / n, lo), hi))
    if n < 2:
        raise DomainError("adaptive crossover needs n >= 2")
    q_m = min(max(state.q_m + float(H) / n, lo), hi)
    C_R = min(1.0, (state.C_R * state.q_m + float(H) / (n - 1)) / q_m)
    return state._replace(q_m=q_m, C_R=C_R)


def flip_masks(kernel, rng, size=1):
    """Draw `size` flip patterns of the kernel's operator.

    For crossover, bit i of the offspring comes from the mutant when i is the
    forced index or a uniform draw falls below C_R, so it differs from the
    parent iff it was both mutated and taken.
    """
    n = kernel.n
    if kernel.variant is kernels.Variant.MUTATION_ONLY:
        return rng.random((size, n)) < kernel.p_m
    forced = rng.integers(n, size=size)
    mutated = rng.random((size, n)) < kernel.q_m
    taken = rng.random((size, n)) < kernel.C_R
    taken[np.arange(size), forced] = True
    return mutated & taken


Step = collections.namedtuple("Step", "accepted, x, hamming, level")


def _step(problem, x, kernel, rng):
    y = x ^ flip_masks(kernel, rng)[0]
    level_x = problem.level_of_ones[int(x.sum())]
    level_y = problem.level_of_ones[int(y.sum())]
    hamming = int((x != y).sum())
    if level_y <= level_x:
        return Step(True, y, hamming, int(level_y))
    return Step(False, x, hamming, int(level_x))


def step_ea(problem, x, p_m, rng):
    """One generation of the (1+1) EA from bitstring x."""
    return _step(problem, x, kernels.mutation_kernel(problem.n, p_m), rng)


def step_ea_c(problem, x, q_m, C_R, rng):
    """One generation of the (1+1) EA with binomial crossover from x."""
    return _step(problem, x, kernels.crossover_kernel(problem.n, q_m, C_R), rng)


def sample_transitions(problem, kernel, level, steps, rng, batch=100000):
    """Counts of the level reached in one generation from a fixed level.

    Returns:
      An int array of length L+1; entry i counts the steps landing on level i.
    """
    c = int(problem.ones_of_level()[level])
    x = np.zeros(problem.n, dtype=bool)
    x[:c] = True
    counts = np.zeros(problem.L + 1, dtype=np.int64)
    done = 0
    while done < steps:
        size = min(batch, steps - done)
        ones = (x[None, :] ^ flip_masks(kernel, rng, size)).sum(axis=1)
        landed = problem.level_of_ones[ones]
        landed = np.where(landed <= level, landed, level)
        counts += np.bincount(landed, minlength=problem.L + 1)
        done += size
    return counts


def _run_bitstring(config, run):
    problem = config.problem
    n = problem.n
    rng = make_rng(config.base_seed, run)
    x = rng.random(n) < 0.5
    trace = np.zeros(config.horizon + 1, dtype=np.int64)
    level = problem.level_of_ones[int(x.sum())]
    trace[0] = level
    state = config.initial_state()
    kernel = state_kernel(state, n, config.algorithm)
    for t in range(1, config.horizon + 1):
        if level == 0:
            break
        step = _step(problem, x, kernel, rng)
        if step.accepted:
            if config.adaptive and step.level < level:
                state = adapt_parameters(state, step.hamming, n, config.algorithm)
                kernel = state_kernel(state, n, config.algorithm)
            x, level = step.x, step.level
        trace[t] = level
    return trace


def _geometric_wait(rng, success):
    """Generations until the first success; float so tiny rates cannot overflow."""
    if success >= 1.0:
        return 1.0
    u = rng.random()
    return max(1.0, math.ceil(math.log1p(-u) / math.log1p(-success)))


def _run_jump(config, run):
    problem = config.problem
    n = problem.n
    rng = make_rng(config.base_seed, run)
    c = int(rng.binomial(n, 0.5))
    level = int(problem.level_of_ones[c])
    T = config.horizon
    trace = np.zeros(T + 1, dtype=np.int64)
    trace[0] = level
    state = config.initial_state()
    table = transitions.MoveTable(problem,
                                  state_kernel(state, n, config.algorithm))
    cache = {}
    t = 0
    while t < T and level > 0:
        moves = cache.get(c)
        if moves is None:
            moves = table.improving(c)
            if not config.adaptive:
                cache[c] = moves
        cumulative = np.cumsum(moves.weights)
        escape = cumulative[-1] if cumulative.size else 0.0
        if escape <= 0:
            break
        wait = _geometric_wait(rng, escape)
        if t + wait > T:
            break
        landing = t + int(wait)
        trace[t + 1:landing] = level
        k = int(np.searchsorted(cumulative, rng.random() * escape, side="right"))
        k = min(k, cumulative.size - 1)
        c, level = int(moves.ones[k]), int(problem.level_of_ones[moves.ones[k]])
        trace[landing] = level
        t = landing
        if config.adaptive:
            state = adapt_parameters(state, int(moves.flips[k]), n,
                                     config.algorithm)
            table = table.with_kernel(state_kernel(state, n, config.algorithm))
    trace[t + 1:] = level
    return trace


def simulate_run(config, run):
    """Error-level trace of run `run`: an int array of length horizon+1."""
    if config.engine == "bitstring":
        return _run_bitstring(config, run)
    return _run_jump(config, run)


class Occupancy(object):
    """How many runs sat on each level at each generation.

    Counts are integers, so merging chunks is exact in any order.

    Attributes:
      runs: the number of traces added.
      counts: int array (T+1, L+1).
    """

    def __init__(self, horizon, L):
        self.runs = 0
        self._delta = np.zeros((horizon + 2, L + 1), dtype=np.int64)

    def add(self, trace):
        # A trace is piecewise constant; record where each segment starts
        # and ends instead of every generation.
        starts = np.concatenate(([0], np.flatnonzero(np.diff(trace)) + 1))
        ends = np.append(starts[1:], trace.size)
        levels = trace[starts]
        np.add.at(self._delta, (starts, levels), 1)
        np.add.at(self._delta, (ends, levels), -1)
        self.runs += 1

    def merge(self, other):
        self._delta += other._delta
        self.runs += other.runs

    @property
    def counts(self):
        return np.cumsum(self._delta, axis=0)[:-1]


def _run_chunk(config, first, last):
    occupancy = Occupancy(config.horizon, config.problem.L)
    for run in range(first, last):
        occupancy.add(simulate_run(config, run))
    log.debug("runs %d..%d done", first, last - 1)
    return occupancy


def _chunk_bounds(runs):
    return [(lo, min(lo + CHUNK_SIZE, runs))
            for lo in range(0, runs, CHUNK_SIZE)]


def _mean_and_se(counts, values, N):
    """Mean of `values[level]` over runs and its standard error (ddof=1)."""
    mean = counts.dot(values) / N
    if N < 2:
        return mean, np.zeros_like(mean)
    squares = counts.dot(values * values)
    variance = np.maximum(squares - N * mean * mean, 0.0) / (N - 1)
    return mean, np.sqrt(variance / N)


class MonteCarloResult(object):
    """Empirical EAE and tail series with their standard errors.

    Attributes:
      config: the SimConfig that produced the result.
      series: a chain.MetricSeries of the means.
      eae_se: standard error of the mean error at every generation.
      tails_se: OrderedDict from tail index to its standard-error series.
      occupancy: the merged Occupancy the statistics came from.
    """

    def __init__(self, config, occupancy):
        self.config = config
        self.occupancy = occupancy
        counts = occupancy.counts.astype(float)
        N = float(occupancy.runs)
        L = config.problem.L
        eae, self.eae_se = _mean_and_se(counts, config.problem.error_vector, N)
        tails = collections.OrderedDict()
        self.tails_se = collections.OrderedDict()
        for i in config.tails:
            tails[i], self.tails_se[i] = _mean_and_se(
                counts, chain.tail_error_vector(L, i), N)
        self.series = chain.MetricSeries(eae, tails)

    @property
    def runs(self):
        return self.occupancy.runs

    def level_frequencies(self, t):
        """Empirical level distribution at generation t."""
        return self.occupancy.counts[t] / float(self.runs)

    def __repr__(self):
        return "MonteCarloResult(runs=%d, T=%d)" % (self.runs,
                                                     self.series.horizon)


def monte_carlo(config):
    """Average `config.runs` independent traces."""
    bounds = _chunk_bounds(config.runs)
    firsts, lasts = [b[0] for b in bounds], [b[1] for b in bounds]
    if config.workers > 1 and len(bounds) > 1:
        with concurrent.futures.ProcessPoolExecutor(config.workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(bounds), firsts,
                                  lasts))
    else:
        parts = [_run_chunk(config, lo, hi) for lo, hi in bounds]
    occupancy = parts[0]
    for part in parts[1:]:
        occupancy.merge(part)
    log.info("Monte Carlo over %d runs in %d chunks: %r", occupancy.runs,
             len(parts), config)
    return MonteCarloResult(config, occupancy)
