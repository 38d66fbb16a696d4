"""Dense CSV and MatrixMarket readers/writers.

CSV files are header-less comma-separated rows. MatrixMarket support covers
the ``array`` and ``coordinate`` layouts; coordinate files are materialized
densely on read. Values are written with 17 significant digits so a
round-trip reproduces every double exactly.
"""

import os

import numpy as np
import scipy.io
import scipy.sparse

from .core import as_matrix
from .errors import ConfigError

FLOAT_FMT = "%.17g"
_MM_EXT = (".mtx", ".mm")


def _is_mm(path):
    return os.fspath(path).lower().endswith(_MM_EXT)


def read_csv(path):
    return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)


def write_csv(path, A):
    A = as_matrix(A)
    np.savetxt(path, A, delimiter=",", fmt=FLOAT_FMT)


def read_mm(path):
    M = scipy.io.mmread(path)
    if scipy.sparse.issparse(M):
        M = M.toarray()
    return as_matrix(M)


def write_mm(path, A, layout="array"):
    A = as_matrix(A)
    if layout == "coordinate":
        scipy.io.mmwrite(path, scipy.sparse.coo_matrix(A), precision=17)
    elif layout == "array":
        scipy.io.mmwrite(path, A, precision=17)
    else:
        raise ConfigError(f"unknown MatrixMarket layout {layout!r}")


def read_matrix(path):
    """Read a dense matrix, dispatching on the file extension."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"input file not found: {path}")
    return read_mm(path) if _is_mm(path) else read_csv(path)


def write_matrix(path, A):
    if _is_mm(path):
        write_mm(path, A)
    else:
        write_csv(path, A)
