"""The subcommands of `python -m levelchain`.

Each cmd_* function takes the parsed argparse namespace and a text stream
for its standard output, and returns what it printed or wrote so that it can
be driven from tests.
"""

import collections
import logging
import os

import numpy as np

from . import chain
from . import formats
from . import kernels
from . import optima
from . import problems
from . import recipes
from . import simulator
from . import transitions
from .errors import ConfigurationError

log = logging.getLogger(__name__)

COUNTEREXAMPLES = ("counterexample-r", "counterexample-s")
DEFAULT_QM_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))


def _print_rows(out, header, rows):
    formats.write_rows(out, header, rows)


def kernel_from_rates(n, algo, p=None, q_m=None, C_R=None):
    """A FlipKernel from the CLI's rate flags.

    `ea` needs p. `eac` needs two of q_m, C_R and the coupled rate p.
    """
    if algo not in [v.value for v in kernels.Variant]:
        raise ConfigurationError("unknown algorithm %r" % (algo,))
    if kernels.Variant(algo) is kernels.Variant.MUTATION_ONLY:
        if p is None:
            raise ConfigurationError("--algo ea needs --p")
        return kernels.mutation_kernel(n, p)
    if q_m is not None and C_R is not None:
        kernels.check_coupled_rate(p, q_m * C_R)
        return kernels.crossover_kernel(n, q_m, C_R)
    if p is not None and C_R is not None:
        return kernels.coupled_kernel(n, p, C_R)
    if p is not None and q_m is not None:
        return kernels.crossover_kernel(n, q_m, p / q_m)
    raise ConfigurationError("--algo eac needs two of --qm, --cr and --p")


_SPEC_KEYS = {"p": "p", "p_m": "p", "q_m": "q_m", "qm": "q_m",
              "C_R": "C_R", "cr": "C_R"}


def parse_kernel_spec(text, n):
    """Parse `ea:p_m=0.1` or `eac:q_m=0.2,C_R=0.5` into a FlipKernel."""
    algo, _, params = text.partition(":")
    rates = {}
    for item in filter(None, params.split(",")):
        key, sep, value = item.partition("=")
        if not sep or key.strip() not in _SPEC_KEYS:
            raise ConfigurationError("bad kernel parameter %r in %r" %
                                     (item, text))
        try:
            rates[_SPEC_KEYS[key.strip()]] = float(value)
        except ValueError:
            raise ConfigurationError("bad number %r in %r" % (value, text))
    return kernel_from_rates(n, algo.strip(), **rates)


def cmd_kernel(args, out):
    """Print P1(l), P2(l) and their difference for l = 0..n.

    Both kernels share the per-bit rate p = C_R q_m.
    """
    n = args.n
    if args.p is None and args.qm is not None and args.cr is not None:
        p = args.qm * args.cr
    else:
        p = args.p
    if p is None or args.cr is None:
        raise ConfigurationError("kernel needs --cr and either --p or --qm")
    mutation = kernels.mutation_kernel(n, p)
    crossover = kernels.coupled_kernel(n, p, args.cr)
    rows = []
    for l in range(n + 1):
        p1, p2 = kernels.p1_flip(l, mutation), kernels.p2_flip(l, crossover)
        rows.append((l, p1, p2, p2 - p1))
    _print_rows(out, ["l", "p1", "p2", "diff"], rows)
    report = kernels.theorem1_holds(n, p, args.cr)
    if not report.holds:
        log.info("P1 > P2 at l = %s", report.violations())
    return rows


def build_matrix(problem_name, n, algo=None, p=None, q_m=None, C_R=None,
                 problem_file=None):
    if problem_name in COUNTEREXAMPLES:
        R, S = transitions.counterexample_pair(n)
        return R if problem_name == "counterexample-r" else S
    problem = problems.make_problem(problem_name, n, problem_file)
    kernel = kernel_from_rates(problem.n, algo or "ea", p, q_m, C_R)
    return transitions.build_for_problem(problem, kernel)


def cmd_matrix(args, out):
    """Build (or load) a transition matrix and print its sanity checks."""
    if args.load:
        matrix = formats.read_matrix(args.load)
    else:
        if args.problem is None or (args.n is None and
                                    args.problem != "custom"):
            raise ConfigurationError("matrix needs --problem and --n, or --load")
        matrix = build_matrix(args.problem, args.n, args.algo, args.p, args.qm,
                              args.cr, args.problem_file)
        if args.out:
            formats.write_matrix(args.out, matrix)
    drift = float(np.max(np.abs(matrix.column_sums() - 1.0)))
    out.write("L=%d\n" % matrix.L)
    out.write("max_column_sum_error=%.3g\n" % drift)
    if matrix.L > 0:
        out.write("spectral_radius=%s\n" % formats.fmt(
            chain.spectral_radius(matrix)))
    return matrix


def cmd_compare(args, out):
    """Exact comparison of a candidate kernel against a baseline kernel."""
    problem = problems.make_problem(args.problem, args.n, args.problem_file)
    baseline = parse_kernel_spec(args.baseline, problem.n)
    candidate = parse_kernel_spec(args.candidate, problem.n)
    B = transitions.build_for_problem(problem, baseline)
    A = transitions.build_for_problem(problem, candidate)
    q0 = problems.initial_distribution(problem)
    tails = tuple(args.tails or (1,))
    series_a = chain.metrics(chain.iterate(A, q0, args.horizon),
                             problem.error_vector, tails)
    series_b = chain.metrics(chain.iterate(B, q0, args.horizon),
                             problem.error_vector, tails)
    out_dir = args.out_dir or recipes.default_output_dir()
    formats.write_trajectory(os.path.join(out_dir, "baseline.csv"), series_b)
    formats.write_trajectory(os.path.join(out_dir, "candidate.csv"), series_a)
    dominance = transitions.dominates(A, B)
    outperformance = chain.outperformance_report(series_a, series_b)
    report = collections.OrderedDict([
        ("problem", problem.kind.value),
        ("n", problem.n),
        ("horizon", args.horizon),
        ("tails", list(tails)),
        ("baseline", repr(baseline)),
        ("candidate", repr(candidate)),
        ("dominates", dominance.dominates),
        ("dominance_witness", dominance.witness()),
        ("conditions", transitions.lemma3_conditions(A, B).as_dict()),
        ("outperforms", outperformance.outperforms),
        ("sign_changes", outperformance.sign_changes()),
        ("final_signs", outperformance.final_signs()),
        ("metrics", outperformance.as_dict()["metrics"]),
        ("spectral_radii", collections.OrderedDict([
            ("baseline", chain.spectral_radius(B)),
            ("candidate", chain.spectral_radius(A))])),
    ])
    formats.write_json(os.path.join(out_dir, "report.json"), report)
    out.write(formats.dumps(report))
    out.write("\n")
    return report


SIM_FIELDS = ("problem", "n", "algorithm", "p_m", "q_m", "C_R", "p",
              "adaptive", "horizon", "runs", "base_seed", "tails", "engine",
              "workers", "custom_file")

# argparse destination of every SimConfig field.
SIM_FLAGS = collections.OrderedDict([
    ("problem", "problem"), ("n", "n"), ("algorithm", "algo"),
    ("p_m", "pm"), ("q_m", "qm"), ("C_R", "cr"), ("p", "p"),
    ("adaptive", "adaptive"), ("horizon", "horizon"), ("runs", "runs"),
    ("base_seed", "seed"), ("tails", "tails"), ("engine", "engine"),
    ("workers", "workers"), ("custom_file", "problem_file"),
])

SIM_DEFAULTS = {"algorithm": "ea", "adaptive": False, "horizon": 1000,
                "runs": 1000, "tails": [1], "engine": "jump", "workers": 1}


def resolve_sim_settings(args):
    """Defaults, then the --config file, then explicit flags."""
    settings = dict(SIM_DEFAULTS)
    if args.config:
        loaded = formats.read_json(args.config)
        unknown = set(loaded) - set(SIM_FIELDS)
        if unknown:
            raise ConfigurationError("unknown config keys: %s" %
                                     ", ".join(sorted(unknown)))
        settings.update(loaded)
    for field, dest in SIM_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            settings[field] = value
    if settings.get("base_seed") is None:
        raise ConfigurationError("simulate needs --seed (or base_seed in --config)")
    if settings.get("problem") is None:
        raise ConfigurationError("simulate needs --problem")
    return settings


def cmd_simulate(args, out):
    settings = resolve_sim_settings(args)
    problem = problems.make_problem(settings["problem"], settings.get("n"),
                                    settings.get("custom_file"))
    config = simulator.SimConfig(
        problem, settings["algorithm"], p_m=settings.get("p_m"),
        q_m=settings.get("q_m"), C_R=settings.get("C_R"), p=settings.get("p"),
        adaptive=settings["adaptive"], horizon=settings["horizon"],
        runs=settings["runs"], base_seed=settings["base_seed"],
        tails=settings["tails"], engine=settings["engine"],
        workers=settings["workers"])
    effective = config.as_dict()
    effective["custom_file"] = settings.get("custom_file")
    out.write(formats.dumps(effective))
    out.write("\n")
    result = simulator.monte_carlo(config)
    path = args.out or os.path.join(recipes.default_output_dir(),
                                    "simulate.csv")
    formats.write_empirical(path, result)
    return result


def cmd_optima(args, out):
    dims = args.dims or [args.n]
    if not dims or dims[0] is None:
        raise ConfigurationError("optima needs --n or --dims")
    grid = args.qm or DEFAULT_QM_GRID
    rows = []
    header = None
    for n in dims:
        for j in range(1, n + 1):
            for q_m in grid:
                row = optima.EscapeAnalysis(n, j, q_m).row()
                header = list(row)
                rows.append(list(row.values()))
    _print_rows(out, header, rows)
    return rows


def cmd_reproduce(args, out):
    summary = recipes.reproduce(
        args.recipe, out_dir=args.out_dir, horizon=args.horizon,
        dims=args.dims, runs=args.runs, base_seed=args.seed or 0,
        workers=args.workers or 1, emit_plot_script=args.emit_plot_script)
    out.write(formats.dumps(summary))
    out.write("\n")
    return summary
