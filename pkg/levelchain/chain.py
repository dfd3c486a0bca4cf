"""Exact fixed-budget analysis of a level transition matrix.

Distributions evolve as q[t+1] = R q[t]. From them follow the expected
approximation error (EAE) e[t] = sum_i e_i q[t][i] and the tail
probabilities TP_i[t] = sum_{l >= i} q[t][l].
"""

import collections
import logging
import math
import reprlib

import numpy as np

from .errors import (ConfigurationError, DegenerateChainError, DomainError,
                     UndefinedRateError)
from .problems import LevelDistribution

log = logging.getLogger(__name__)

repr_obj = reprlib.Repr()
repr_obj.maxother = 120
repper = repr_obj.repr

RENORMALIZE_EVERY = 10000
DRIFT_TOLERANCE = 1e-9
# Slack for "a <= b" comparisons between two series.
SERIES_TOLERANCE = 1e-12


class Trajectory(object):
    """Distributions q[0..T] of one chain.

    Attributes:
      q: read-only (T+1, L+1) array, row t is q[t].
      renormalizations: how many times drift was corrected.
    """

    def __init__(self, q, renormalizations=0):
        self.q = q
        self.q.setflags(write=False)
        self.renormalizations = renormalizations

    @property
    def T(self):
        return self.q.shape[0] - 1

    @property
    def L(self):
        return self.q.shape[1] - 1

    def __len__(self):
        return self.q.shape[0]

    def __getitem__(self, t):
        return self.q[t]

    def __repr__(self):
        return "Trajectory(T=%d, L=%d)" % (self.T, self.L)


def _as_vector(q0):
    if isinstance(q0, LevelDistribution):
        return q0.q
    return LevelDistribution(q0).q


def _check_dims(matrix, q):
    if q.size != matrix.L + 1:
        raise ConfigurationError(
            "distribution has %d levels but the matrix has %d" %
            (q.size, matrix.L + 1))


def iterate(matrix, q0, T):
    """q[0..T] under repeated multiplication by the transition matrix."""
    if T < 0:
        raise DomainError("horizon must be non-negative, got %r" % (T,))
    q = _as_vector(q0)
    _check_dims(matrix, q)
    r = matrix.r
    out = np.empty((T + 1, q.size))
    out[0] = q
    renormalizations = 0
    for t in range(1, T + 1):
        out[t] = r.dot(out[t - 1])
        if t % RENORMALIZE_EVERY == 0:
            total = out[t].sum()
            if abs(total - 1.0) > DRIFT_TOLERANCE:
                log.warning("renormalizing at t=%d, mass %.17g", t, total)
                out[t] /= total
                renormalizations += 1
    log.info("iterated L=%d chain for %d steps", matrix.L, T)
    return Trajectory(out, renormalizations)


def distribution_at(matrix, q0, t):
    """q[t] alone, by repeated squaring of the matrix."""
    if t < 0:
        raise DomainError("t must be non-negative, got %r" % (t,))
    q = _as_vector(q0)
    _check_dims(matrix, q)
    return np.linalg.matrix_power(matrix.r, t).dot(q)


def tail_error_vector(L, i):
    """The error vector (0,...,0,1,...,1) with i zeros; its EAE is TP_i."""
    if not 1 <= i <= L:
        raise DomainError("tail index %r outside [1, %d]" % (i, L))
    e = np.zeros(L + 1)
    e[i:] = 1.0
    return e


class MetricSeries(object):
    """EAE and tail probability series over t = 0..T.

    Attributes:
      eae: float array of length T+1.
      tails: OrderedDict from tail index i to a float array of length T+1.
    """

    def __init__(self, eae, tails):
        self.eae = np.asarray(eae, dtype=float)
        self.tails = collections.OrderedDict(
            (int(i), np.asarray(v, dtype=float)) for i, v in tails.items())

    @property
    def horizon(self):
        return self.eae.size - 1

    def __repr__(self):
        return "MetricSeries(T=%d, tails=%r)" % (self.horizon, list(self.tails))


def check_tail_indices(L, tail_indices):
    for i in tail_indices:
        if not 1 <= i <= L:
            raise DomainError("tail index %r outside [1, %d]" % (i, L))


def metrics(trajectory, error_vector, tail_indices=(1,)):
    q = trajectory.q if isinstance(trajectory, Trajectory) else np.atleast_2d(
        np.asarray(trajectory, dtype=float))
    error_vector = np.asarray(error_vector, dtype=float)
    L = q.shape[1] - 1
    if error_vector.size != L + 1:
        raise ConfigurationError("error vector has %d entries, need %d" %
                                 (error_vector.size, L + 1))
    check_tail_indices(L, tail_indices)
    # Reverse cumulative sums give every tail at once.
    upper = np.cumsum(q[:, ::-1], axis=1)[:, ::-1]
    tails = collections.OrderedDict((i, upper[:, i]) for i in tail_indices)
    return MetricSeries(q.dot(error_vector), tails)


def spectral_radius(matrix):
    """Largest eigenvalue of the non-optimal submatrix: its largest diagonal."""
    if matrix.L == 0:
        raise DegenerateChainError("a one-level chain has no non-optimal states")
    return float(np.max(np.diag(matrix.r)[1:]))


def acr(eae, t):
    """Average convergence rate 1 - (e[t]/e[0])^(1/t)."""
    eae = np.asarray(eae, dtype=float)
    if not 1 <= t < eae.size:
        raise DomainError("t = %r outside [1, %d]" % (t, eae.size - 1))
    if eae[0] == 0:
        raise UndefinedRateError("initial error is zero")
    return 1.0 - (eae[t] / eae[0]) ** (1.0 / t)


def _runs(indices):
    """Maximal runs of consecutive generations as [first, last] pairs."""
    runs = []
    for t in indices:
        if runs and runs[-1][1] == t - 1:
            runs[-1][1] = t
        else:
            runs.append([t, t])
    return runs


class MetricComparison(object):
    """Sign pattern of one metric difference a[t] - b[t].

    A difference within SERIES_TOLERANCE of zero counts as a tie.

    Attributes:
      a_better_at: generations t with a[t] < b[t], ascending.
      b_better_at: generations t with a[t] > b[t], ascending.
      tied_at: the remaining t.
      sign_changes: generations t where the strict sign flips relative to
        the last strict sign before t.
      final_sign: -1, 0 or +1 at the last generation.
      a_never_worse: a[t] <= b[t] + SERIES_TOLERANCE for every t.
    """

    def __init__(self, a, b):
        diff = np.asarray(a) - np.asarray(b)
        signs = np.where(diff > SERIES_TOLERANCE, 1,
                         np.where(diff < -SERIES_TOLERANCE, -1, 0))
        self.difference = diff
        self.a_better_at = np.flatnonzero(signs < 0).tolist()
        self.b_better_at = np.flatnonzero(signs > 0).tolist()
        self.tied_at = np.flatnonzero(signs == 0).tolist()
        self.final_sign = int(signs[-1])
        self.a_never_worse = not self.b_better_at
        self.sign_changes = []
        last = 0
        for t, s in enumerate(signs):
            if s == 0:
                continue
            if last != 0 and s != last:
                self.sign_changes.append(t)
            last = s

    @property
    def a_better(self):
        return len(self.a_better_at)

    @property
    def b_better(self):
        return len(self.b_better_at)

    @property
    def ties(self):
        return len(self.tied_at)

    @property
    def changes_sign(self):
        return bool(self.sign_changes)

    def as_dict(self):
        # Index sets are reported as [first, last] runs.
        return collections.OrderedDict([
            ("a_better", self.a_better),
            ("b_better", self.b_better),
            ("ties", self.ties),
            ("a_better_runs", _runs(self.a_better_at)),
            ("b_better_runs", _runs(self.b_better_at)),
            ("tie_runs", _runs(self.tied_at)),
            ("sign_changes", self.sign_changes),
            ("final_sign", self.final_sign),
            ("a_never_worse", self.a_never_worse),
        ])


class OutperformanceReport(object):
    """Whether series A outperforms series B at every generation.

    Attributes:
      comparisons: OrderedDict from metric name ("eae", "tp_<i>") to its
        MetricComparison.
      outperforms: A is never worse than B on any metric.
    """

    def __init__(self, comparisons):
        self.comparisons = comparisons
        self.outperforms = all(c.a_never_worse for c in comparisons.values())

    def sign_changes(self):
        return collections.OrderedDict(
            (name, c.sign_changes) for name, c in self.comparisons.items())

    def final_signs(self):
        return collections.OrderedDict(
            (name, c.final_sign) for name, c in self.comparisons.items())

    def as_dict(self):
        return collections.OrderedDict([
            ("outperforms", self.outperforms),
            ("metrics", collections.OrderedDict(
                (name, c.as_dict()) for name, c in self.comparisons.items())),
        ])


def outperformance_report(series_a, series_b):
    if series_a.horizon != series_b.horizon:
        raise ConfigurationError("horizons differ: %d vs %d" %
                                 (series_a.horizon, series_b.horizon))
    if list(series_a.tails) != list(series_b.tails):
        raise ConfigurationError("tail indices differ: %r vs %r" %
                                 (list(series_a.tails), list(series_b.tails)))
    comparisons = collections.OrderedDict()
    comparisons["eae"] = MetricComparison(series_a.eae, series_b.eae)
    for i in series_a.tails:
        comparisons["tp_%d" % i] = MetricComparison(series_a.tails[i],
                                                    series_b.tails[i])
    report = OutperformanceReport(comparisons)
    log.debug("outperformance: %s", repper(report.final_signs()))
    return report


Checkpoint = collections.namedtuple("Checkpoint", "t, log_ratios, favours_a")


class AsymptoticProbe(object):
    """Orderings of two chains at t = 1, 2, 4, ..., max_horizon.

    Attributes:
      checkpoints: Checkpoints in increasing t; log_ratios maps each metric
        name to log(metric_A / metric_B).
      t_star: earliest checkpoint from which every later checkpoint strictly
        favours A on every metric, or None.
    """

    def __init__(self, checkpoints):
        self.checkpoints = checkpoints
        self.t_star = None
        for cp in reversed(checkpoints):
            if not cp.favours_a:
                break
            self.t_star = cp.t

    def as_dict(self):
        return collections.OrderedDict([
            ("t_star", self.t_star),
            ("checkpoints", [collections.OrderedDict([
                ("t", cp.t),
                ("log_ratios", dict(cp.log_ratios)),
                ("favours_a", cp.favours_a)]) for cp in self.checkpoints]),
        ])


class _ScaledPower(object):
    """M^(2^k) held as exp(log_scale) * unit with max|unit| = 1."""

    def __init__(self, m):
        self.unit = np.array(m, dtype=float)
        self.log_scale = 0.0
        self._rescale()

    def _rescale(self):
        peak = np.abs(self.unit).max()
        if peak > 0:
            self.unit /= peak
            self.log_scale += math.log(peak)

    def square(self):
        self.unit = self.unit.dot(self.unit)
        self.log_scale *= 2
        self._rescale()

    def log_metrics(self, q, weights):
        """log(w . M^(2^k) q) for every row w of `weights`."""
        v = self.unit.dot(q)
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(weights.dot(v), 0.0)) + self.log_scale


def asymptotic_probe(A, B, q0, error_vector, tail_indices=(1,),
                     max_horizon=10 ** 6):
    """Compare the EAE and tails of chains A and B at powers of two.

    Only the non-optimal submatrices are powered, as the optimum contributes
    nothing to any metric; working in log space keeps tiny values apart.
    """
    if A.L != B.L:
        raise ConfigurationError("chains have %d and %d levels" %
                                 (A.L + 1, B.L + 1))
    if A.L == 0:
        raise DegenerateChainError("a one-level chain has no non-optimal states")
    q = _as_vector(q0)
    _check_dims(A, q)
    check_tail_indices(A.L, tail_indices)
    error_vector = np.asarray(error_vector, dtype=float)
    names = ["eae"] + ["tp_%d" % i for i in tail_indices]
    weights = np.vstack([error_vector[1:]] +
                        [tail_error_vector(A.L, i)[1:] for i in tail_indices])
    pa, pb = _ScaledPower(A.submatrix), _ScaledPower(B.submatrix)
    checkpoints = []
    t = 1
    while t <= max_horizon:
        la = pa.log_metrics(q[1:], weights)
        lb = pb.log_metrics(q[1:], weights)
        with np.errstate(invalid="ignore"):
            ratios = la - lb
        favours = bool(np.all(ratios < 0))
        checkpoints.append(Checkpoint(
            t, collections.OrderedDict(zip(names, ratios.tolist())), favours))
        pa.square()
        pb.square()
        t *= 2
    probe = AsymptoticProbe(checkpoints)
    log.info("asymptotic probe up to %d: t_star=%r", max_horizon, probe.t_star)
    return probe
