"""CSV and JSON input/output.

Every float is written with 17 significant digits, which is enough for a
double to read back bit-exactly.
"""

import csv
import json
import logging
import os

import numpy as np

from .errors import ConfigurationError
from .transitions import TransitionMatrix

log = logging.getLogger(__name__)


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def ensure_dir(path):
    if path and not os.path.isdir(path):
        os.makedirs(path)


def _open_for_write(path):
    ensure_dir(os.path.dirname(path))
    return open(path, "w", newline="")


def write_rows(stream, header, rows):
    writer = csv.writer(stream, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def write_matrix(path, matrix):
    """A first line L=<L>, then one CSV row per destination level."""
    with _open_for_write(path) as f:
        f.write("L=%d\n" % matrix.L)
        write_rows(f, None, matrix.r)
    log.info("wrote %d x %d matrix to %s", matrix.L + 1, matrix.L + 1, path)


def read_matrix(path):
    try:
        with open(path, newline="") as f:
            first = f.readline().strip()
            if not first.startswith("L="):
                raise ValueError("first line must be L=<value>, got %r" % first)
            L = int(first[2:])
            rows = [[float(v) for v in row] for row in csv.reader(f) if row]
    except (IOError, ValueError) as e:
        raise ConfigurationError("cannot read matrix %r: %s" % (path, e))
    if len(rows) != L + 1:
        raise ConfigurationError("matrix %r declares L=%d but has %d rows" %
                                 (path, L, len(rows)))
    return TransitionMatrix(rows)


def series_rows(series):
    """Rows t, eae, tp_<i>... of a MetricSeries."""
    header = ["t", "eae"] + ["tp_%d" % i for i in series.tails]
    columns = [np.arange(series.horizon + 1), series.eae] + list(
        series.tails.values())
    return header, zip(*columns)


def write_trajectory(path, series):
    header, rows = series_rows(series)
    with _open_for_write(path) as f:
        write_rows(f, header, rows)
    log.info("wrote trajectory T=%d to %s", series.horizon, path)


def write_empirical(path, result):
    """Rows t, mean_err, se_err, tp_<i>, se_tp_<i>... of a MonteCarloResult."""
    header = ["t", "mean_err", "se_err"]
    columns = [np.arange(result.series.horizon + 1), result.series.eae,
               result.eae_se]
    for i in result.series.tails:
        header += ["tp_%d" % i, "se_tp_%d" % i]
        columns += [result.series.tails[i], result.tails_se[i]]
    with _open_for_write(path) as f:
        write_rows(f, header, zip(*columns))
    log.info("wrote empirical series of %d runs to %s", result.runs, path)


def read_table(path):
    """A headed CSV as a dict from column name to float array."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows).reshape(-1, len(header))
    return dict((name, data[:, k]) for k, name in enumerate(header))


class _Encoder(json.JSONEncoder):

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return json.JSONEncoder.default(self, o)


def dumps(obj):
    return json.dumps(obj, indent=2, cls=_Encoder)


def write_json(path, obj):
    with _open_for_write(path) as f:
        f.write(dumps(obj))
        f.write("\n")
    log.info("wrote %s", path)


def read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except (IOError, ValueError) as e:
        raise ConfigurationError("cannot read %r: %s" % (path, e))
