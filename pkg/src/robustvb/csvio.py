"""CSV helpers; every float is written with 17 significant digits so it reads back bit-exact."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def write_matrix(path, A) -> Path:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    np.savetxt(path, A, fmt=FLOAT_FMT, delimiter=",")
    return Path(path)


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_table(path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return Path(path)


def read_table(path) -> dict[str, np.ndarray]:
    """Read a headed numeric CSV into a column dict."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}
