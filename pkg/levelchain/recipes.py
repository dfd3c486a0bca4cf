"""Built-in experiments that regenerate the comparison figures as data.

fig1: the counterexample chains R and S, exact iteration.
fig2: Deceptive with and without crossover at p = 1/n, exact iteration.
fig3: adaptive versus fixed parameters on Deceptive, Monte Carlo.

Each recipe writes CSVs plus a summary.json recording what was computed,
every assumption made, and the qualitative verdicts.
"""

import collections
import logging
import math
import os

import numpy as np

from . import chain
from . import formats
from . import kernels
from . import problems
from . import simulator
from . import transitions
from .errors import ConfigurationError

log = logging.getLogger(__name__)

OUTPUT_DIR_VARIABLE = "LEVELCHAIN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "levelchain-output"
# Largest t probed for the asymptotic ordering.
PROBE_HORIZON = 10 ** 6

Recipe = collections.namedtuple(
    "Recipe", "name, description, dims, horizon, runs, tail_index")

FIG1 = Recipe("fig1", "EAE/TP differences of the counterexample chains",
              dims=(10,), horizon=2000, runs=None, tail_index=1)
FIG2 = Recipe("fig2", "Deceptive with and without crossover at p = 1/n",
              dims=(6, 9, 12, 15), horizon=10000, runs=None, tail_index=1)
FIG3 = Recipe("fig3", "adaptive versus fixed parameters on Deceptive",
              dims=(12, 16, 20), horizon=20000, runs=10000, tail_index=1)

RECIPES = collections.OrderedDict((r.name, r) for r in (FIG1, FIG2, FIG3))


def default_output_dir():
    return os.environ.get(OUTPUT_DIR_VARIABLE) or DEFAULT_OUTPUT_DIR


def get_recipe(name, horizon=None, dims=None, runs=None):
    """A recipe by name, with optional overrides."""
    try:
        recipe = RECIPES[name]
    except KeyError:
        raise ConfigurationError("unknown recipe %r; choose from %s" %
                                 (name, ", ".join(RECIPES)))
    changes = {}
    if horizon is not None:
        changes["horizon"] = int(horizon)
    if dims:
        changes["dims"] = tuple(int(n) for n in dims)
    if runs is not None:
        if recipe.runs is None:
            log.warning("%s iterates exactly; --runs is ignored", name)
        else:
            changes["runs"] = int(runs)
    return recipe._replace(**changes)


def _strict_both(a, b, tail):
    """Generations where series a is strictly below b on EAE and on the tail."""
    tol = chain.SERIES_TOLERANCE
    return np.flatnonzero((a.eae < b.eae - tol) &
                          (a.tails[tail] < b.tails[tail] - tol))


def _first(indices):
    return int(indices[0]) if len(indices) else None


def run_fig1(recipe, out_dir):
    i = recipe.tail_index
    results = collections.OrderedDict()
    for n in recipe.dims:
        R, S = transitions.counterexample_pair(n)
        q0 = problems.LevelDistribution.uniform(n)
        e = np.arange(n + 1, dtype=float)
        series_r = chain.metrics(chain.iterate(R, q0, recipe.horizon), e, (i,))
        series_s = chain.metrics(chain.iterate(S, q0, recipe.horizon), e, (i,))
        formats.write_trajectory(os.path.join(out_dir, "r_n%d.csv" % n),
                                 series_r)
        formats.write_trajectory(os.path.join(out_dir, "s_n%d.csv" % n),
                                 series_s)
        # Differences are S minus R.
        report = chain.outperformance_report(series_s, series_r)
        eae, tp = report.comparisons["eae"], report.comparisons["tp_%d" % i]
        formats.write_trajectory(
            os.path.join(out_dir, "difference_n%d.csv" % n),
            chain.MetricSeries(eae.difference,
                               collections.OrderedDict([(i, tp.difference)])))
        results["n=%d" % n] = collections.OrderedDict([
            ("tp_difference_changes_sign", tp.a_better > 0 and tp.b_better > 0),
            ("eae_difference_changes_sign",
             eae.a_better > 0 and eae.b_better > 0),
            ("tp_first_negative", _first(np.flatnonzero(
                tp.difference < -chain.SERIES_TOLERANCE))),
            ("tp_first_positive", _first(np.flatnonzero(
                tp.difference > chain.SERIES_TOLERANCE))),
            ("tp_sign_changes", tp.sign_changes),
            ("eae_sign_changes", eae.sign_changes),
            ("s_dominates_r", transitions.dominates(S, R).dominates),
            ("conditions", transitions.lemma3_conditions(S, R).as_dict()),
            ("spectral_radii", collections.OrderedDict([
                ("r", chain.spectral_radius(R)),
                ("s", chain.spectral_radius(S))])),
        ])
    return collections.OrderedDict([
        ("results", results),
        ("assumptions", [
            "exact iteration of the level chains",
            "initial distribution uniform over all L+1 levels",
            "error vector e_i = i",
            "tail index %d" % i,
            "differences are S minus R",
        ]),
        ("initial_distribution_note",
         "the initial distribution is not stated for these chains; "
         "a uniform distribution over levels is used"),
    ])


def fig2_kernels(n):
    """Mutation at p_m = 1/n and crossover at q_m = 1/2, C_R = 2/n."""
    return (kernels.mutation_kernel(n, 1.0 / n),
            kernels.crossover_kernel(n, 0.5, 2.0 / n))


def run_fig2(recipe, out_dir):
    i = recipe.tail_index
    results = collections.OrderedDict()
    for n in recipe.dims:
        problem = problems.deceptive(n)
        q0 = problems.initial_distribution(problem)
        mutation, crossover = fig2_kernels(n)
        P = transitions.build_deceptive(n, mutation)
        S = transitions.build_deceptive(n, crossover)
        ea = chain.metrics(chain.iterate(P, q0, recipe.horizon),
                           problem.error_vector, (i,))
        eac = chain.metrics(chain.iterate(S, q0, recipe.horizon),
                            problem.error_vector, (i,))
        formats.write_trajectory(os.path.join(out_dir, "ea_n%d.csv" % n), ea)
        formats.write_trajectory(os.path.join(out_dir, "eac_n%d.csv" % n), eac)
        ea_ahead = _strict_both(ea, eac, i)
        report = chain.outperformance_report(eac, ea)
        probe = chain.asymptotic_probe(S, P, q0, problem.error_vector, (i,),
                                       PROBE_HORIZON)
        results["n=%d" % n] = collections.OrderedDict([
            ("exists_t_where_ea_beats_eac", bool(len(ea_ahead))),
            ("ea_ahead_generations", int(len(ea_ahead))),
            ("first_t_ea_ahead", _first(ea_ahead)),
            ("eac_outperforms_at_every_t", report.outperforms),
            ("sign_changes", report.sign_changes()),
            ("final_signs", report.final_signs()),
            ("eac_dominates_ea", transitions.dominates(S, P).dominates),
            ("spectral_radii", collections.OrderedDict([
                ("ea", chain.spectral_radius(P)),
                ("eac", chain.spectral_radius(S))])),
            ("asymptotic_t_star", probe.t_star),
        ])
    return collections.OrderedDict([
        ("results", results),
        ("assumptions", [
            "exact iteration of the level chains",
            "uniformly random initial bitstring",
            "p_m = 1/n, q_m = 1/2, C_R = 2/n",
            "tail index %d" % i,
            "dimensions chosen to straddle n = 9",
        ]),
    ])


def fig3_variants(n):
    """(name, algorithm, parameters, adaptive) for every compared variant."""
    p = 1.0 / n
    variants = []
    for adaptive in (False, True):
        suffix = "adaptive" if adaptive else "fixed"
        variants.append(("ea-%s" % suffix, kernels.Variant.MUTATION_ONLY,
                         dict(p_m=p), adaptive))
        for k, factor in enumerate((1.0, 1.5, 2.0), 1):
            q_m = factor / math.sqrt(n)
            variants.append(("eac%d-%s" % (k, suffix),
                             kernels.Variant.MUTATION_CROSSOVER,
                             dict(q_m=q_m, C_R=p / q_m, p=p), adaptive))
    return variants


def _gap(fixed, adaptive, i):
    """Final-horizon TP gap fixed - adaptive, in pooled standard errors."""
    diff = fixed.series.tails[i][-1] - adaptive.series.tails[i][-1]
    pooled = math.hypot(fixed.tails_se[i][-1], adaptive.tails_se[i][-1])
    if pooled == 0:
        return float("inf") if diff > 0 else 0.0
    return diff / pooled


def run_fig3(recipe, out_dir, base_seed=0, workers=1, engine="jump"):
    i = recipe.tail_index
    results = collections.OrderedDict()
    for n in recipe.dims:
        problem = problems.deceptive(n)
        runs = collections.OrderedDict()
        for k, (name, algorithm, params, adaptive) in enumerate(fig3_variants(n)):
            config = simulator.SimConfig(
                problem, algorithm, adaptive=adaptive, horizon=recipe.horizon,
                runs=recipe.runs, base_seed=base_seed + 1000 * n + k,
                tails=(i,), engine=engine, workers=workers, **params)
            result = simulator.monte_carlo(config)
            formats.write_empirical(
                os.path.join(out_dir, "n%d_%s.csv" % (n, name)), result)
            runs[name] = result
        final = collections.OrderedDict(
            (name, collections.OrderedDict([
                ("tp", float(r.series.tails[i][-1])),
                ("se", float(r.tails_se[i][-1]))]))
            for name, r in runs.items())
        adaptive_vs_fixed = collections.OrderedDict()
        for name in runs:
            if name.endswith("-adaptive"):
                base = name[:-len("adaptive")] + "fixed"
                adaptive_vs_fixed[name] = _gap(runs[base], runs[name], i)
        eac_vs_ea = collections.OrderedDict(
            (name, _gap(runs["ea-adaptive"], runs[name], i))
            for name in runs
            if name.startswith("eac") and name.endswith("-adaptive"))
        results["n=%d" % n] = collections.OrderedDict([
            ("final_tp", final),
            ("adaptive_vs_fixed_gap_se", adaptive_vs_fixed),
            ("adaptive_beats_fixed",
             all(g > 3 for g in adaptive_vs_fixed.values())),
            ("adaptive_eac_vs_adaptive_ea_gap_se", eac_vs_ea),
            ("adaptive_eac_beats_adaptive_ea",
             all(g > 3 for g in eac_vs_ea.values())),
        ])
    return collections.OrderedDict([
        ("results", results),
        ("assumptions", [
            "coupled rate p = 1/n; C_R = p / q_m at start",
            "q_m starts at 1/sqrt(n), 3/(2 sqrt(n)), 2/sqrt(n)",
            "adaptive updates only on strict improvements",
            "p_m and q_m clamped to [1/n^2, 1 - 1/n^2], C_R to (0, 1]",
            "%s engine, base seed %d" % (engine, base_seed),
            "tail index %d" % i,
            "gaps are in pooled standard errors at the final horizon",
        ]),
    ])


PLOT_SCRIPT = '''"""Plot the CSVs written by `levelchain reproduce %(name)s`."""

import csv
import glob
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    column = [c for c in rows[0] if c.startswith("tp_")][0]
    plt.plot([float(r["t"]) for r in rows], [float(r[column]) for r in rows],
             label=os.path.basename(path)[:-4])
plt.xlabel("t")
plt.ylabel(column)
plt.legend()
plt.savefig(os.path.join(here, "%(name)s.png"))
'''


def reproduce(name, out_dir=None, horizon=None, dims=None, runs=None,
              base_seed=0, workers=1, emit_plot_script=False):
    """Run a recipe and write its CSVs and summary.json under out_dir/name."""
    recipe = get_recipe(name, horizon, dims, runs)
    target = os.path.join(out_dir or default_output_dir(), recipe.name)
    formats.ensure_dir(target)
    log.info("reproducing %r into %s", recipe, target)
    if recipe.name == "fig1":
        body = run_fig1(recipe, target)
    elif recipe.name == "fig2":
        body = run_fig2(recipe, target)
    else:
        body = run_fig3(recipe, target, base_seed, workers)
    summary = collections.OrderedDict([
        ("recipe", recipe.name),
        ("description", recipe.description),
        ("dims", list(recipe.dims)),
        ("horizon", recipe.horizon),
        ("runs", recipe.runs),
        ("tail_index", recipe.tail_index),
    ])
    summary.update(body)
    formats.write_json(os.path.join(target, "summary.json"), summary)
    if emit_plot_script:
        with open(os.path.join(target, "plot_%s.py" % recipe.name), "w") as f:
            f.write(PLOT_SCRIPT % {"name": recipe.name})
    return summary
