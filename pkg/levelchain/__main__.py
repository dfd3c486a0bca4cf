"""A main program for levelchain."""

import argparse
import logging
import sys

from . import commands
from . import recipes
from .errors import LevelChainError

parser = argparse.ArgumentParser(
    prog="levelchain",
    description="Exact and Monte Carlo analysis of elitist (1+1) EAs with "
                "and without binomial crossover.",
)
parser.add_argument(
    '-v', '--verbose', dest='verbose', action='store_true',
    help="log progress of the analysis.",
)
subparsers = parser.add_subparsers(dest='command', metavar='command')
subparsers.required = True


def _rate_flags(sub):
    sub.add_argument('--algo', choices=['ea', 'eac'],
                     help="mutation only (ea) or mutation plus crossover (eac).")
    sub.add_argument('--p', type=float,
                     help="mutation rate for ea; coupled rate C_R*q_m for eac.")
    sub.add_argument('--qm', type=float, help="mutation rate of eac.")
    sub.add_argument('--cr', type=float, help="crossover rate of eac.")


kernel = subparsers.add_parser(
    'kernel', help="print P1(l), P2(l) and their difference as CSV.")
kernel.add_argument('--n', type=int, required=True)
kernel.add_argument('--p', type=float, help="shared per-bit rate C_R*q_m.")
kernel.add_argument('--qm', type=float)
kernel.add_argument('--cr', type=float)
kernel.set_defaults(func=commands.cmd_kernel)

matrix = subparsers.add_parser(
    'matrix', help="build or load a transition matrix.")
matrix.add_argument(
    '--problem', choices=['onemax', 'deceptive', 'custom'] +
    list(commands.COUNTEREXAMPLES))
matrix.add_argument('--problem-file', help="JSON file of a custom problem.")
matrix.add_argument('--n', type=int)
_rate_flags(matrix)
matrix.add_argument('--out', help="where to write the matrix CSV.")
matrix.add_argument('--load', help="read a matrix CSV instead of building one.")
matrix.set_defaults(func=commands.cmd_matrix)

compare = subparsers.add_parser(
    'compare', help="exact comparison of two kernels on one problem.")
compare.add_argument('--problem', choices=['onemax', 'deceptive', 'custom'],
                     required=True)
compare.add_argument('--problem-file')
compare.add_argument('--n', type=int)
compare.add_argument('--baseline', required=True,
                     help="kernel spec, e.g. ea:p_m=0.1")
compare.add_argument('--candidate', required=True,
                     help="kernel spec, e.g. eac:q_m=0.2,C_R=0.5")
compare.add_argument('--horizon', type=int, default=1000)
compare.add_argument('--tails', type=int, nargs='+')
compare.add_argument('--out-dir')
compare.set_defaults(func=commands.cmd_compare)

simulate = subparsers.add_parser(
    'simulate', help="Monte Carlo estimate of EAE and tail probabilities.")
simulate.add_argument('--config', help="JSON file of SimConfig fields.")
simulate.add_argument('--problem', choices=['onemax', 'deceptive', 'custom'])
simulate.add_argument('--problem-file')
simulate.add_argument('--n', type=int)
simulate.add_argument('--algo', choices=['ea', 'eac'])
simulate.add_argument('--pm', type=float)
simulate.add_argument('--qm', type=float)
simulate.add_argument('--cr', type=float)
simulate.add_argument('--p', type=float, help="coupled rate C_R*q_m.")
simulate.add_argument('--adaptive', action='store_const', const=True)
simulate.add_argument('--horizon', type=int)
simulate.add_argument('--runs', type=int)
simulate.add_argument('--seed', type=int)
simulate.add_argument('--tails', type=int, nargs='+')
simulate.add_argument('--engine', choices=['jump', 'bitstring'])
simulate.add_argument('--workers', type=int)
simulate.add_argument('--out', help="where to write the empirical CSV.")
simulate.set_defaults(func=commands.cmd_simulate)

optima = subparsers.add_parser(
    'optima', help="optimal escape rates on Deceptive as CSV.")
optima.add_argument('--n', type=int)
optima.add_argument('--dims', type=int, nargs='+')
optima.add_argument('--qm', type=float, nargs='+')
optima.set_defaults(func=commands.cmd_optima)

reproduce = subparsers.add_parser(
    'reproduce', help="regenerate the data of a built-in figure.")
reproduce.add_argument('recipe', choices=list(recipes.RECIPES))
reproduce.add_argument(
    '--out-dir',
    help="output root; defaults to $%s or ./%s." %
    (recipes.OUTPUT_DIR_VARIABLE, recipes.DEFAULT_OUTPUT_DIR))
reproduce.add_argument('--horizon', type=int)
reproduce.add_argument('--dims', type=int, nargs='+')
reproduce.add_argument('--runs', type=int)
reproduce.add_argument('--seed', type=int)
reproduce.add_argument('--workers', type=int)
reproduce.add_argument('--emit-plot-script', action='store_true')
reproduce.set_defaults(func=commands.cmd_reproduce)


def main(argv=None, out=None):
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING
    logging.basicConfig(level=level)
    try:
        args.func(args, out or sys.stdout)
    except LevelChainError as e:
        sys.stderr.write("levelchain: error: %s\n" % e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
