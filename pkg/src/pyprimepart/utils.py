"""
This module contains utility functions for grids, sign-change detection,
chunked work distribution and deterministic CSV output.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

#: printf format for reals in every CSV the package writes
FLOAT_FORMAT = "%.17g"


@njit
def sign_change_idxs(values):
    """
    Return indices i where the sign of values changes between i-1 and i.

    Zero counts as non-positive; NaN entries never take part in a change.

    Parameters
    ----------
    values : 1D :class:`numpy.ndarray` of floats

    Returns
    -------
    idxs : 1D :class:`numpy.ndarray` of int64
    """
    idxs = []
    for i in range(1, len(values)):
        a = values[i - 1]
        b = values[i]
        if np.isnan(a) or np.isnan(b):
            continue
        if (a > 0) != (b > 0):
            idxs.append(i)
    out = np.empty(len(idxs), dtype=np.int64)
    for j in range(len(idxs)):
        out[j] = idxs[j]
    return out


def log_grid(start, stop, points):
    """
    Logarithmically spaced grid from ``start`` to ``stop`` (both included).
    """
    if start <= 0 or stop <= start:
        raise ValueError(
            f"utils: log grid needs 0 < start < stop, got {start}, {stop}")
    if points < 2:
        raise ValueError(f"utils: log grid needs >= 2 points, got {points}")
    return np.geomspace(start, stop, int(points))


def parse_grid(text):
    """
    Parse an integer grid specification.

    Accepted forms are a comma separated list (``"1000,2000,5000"``), a range
    ``"start:stop:step"`` with stop included when hit, or a log range
    ``"log:start:stop:points"`` rounded to unique integers.

    Examples
    --------
    >>> parse_grid("10:30:10")
    array([10, 20, 30])

    """
    text = text.strip()
    try:
        if text.startswith("log:"):
            start, stop, points = text[4:].split(":")
            grid = np.unique(np.rint(
                log_grid(float(start), float(stop), int(points))).astype(np.int64))
        elif ":" in text:
            parts = [int(float(p)) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError("step must be positive")
            grid = np.arange(start, stop + 1, step, dtype=np.int64)
        else:
            grid = np.array([int(float(p)) for p in text.split(",")],
                            dtype=np.int64)
    except ValueError as err:
        raise ValueError(f"utils: cannot parse grid {text!r}: {err}") from err
    if len(grid) == 0:
        raise ValueError(f"utils: grid {text!r} is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError(f"utils: grid {text!r} is not strictly increasing")
    return grid


def parse_range(text):
    """Parse ``"lo:hi"`` into a pair of floats with lo < hi."""
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError as err:
        raise ValueError(f"utils: cannot parse range {text!r}") from err
    if not lo < hi:
        raise ValueError(f"utils: range {text!r} needs lo < hi")
    return lo, hi


def chunk_bounds(length, chunk):
    """
    Split ``range(length)`` into consecutive half-open ``(start, stop)``
    pairs of at most ``chunk`` entries.
    """
    if chunk < 1:
        raise ValueError(f"utils: chunk size must be >= 1, got {chunk}")
    return [(lo, min(lo + chunk, length)) for lo in range(0, length, chunk)]


def parallel_map(func, items, threads=1):
    """
    Apply ``func`` to every item, optionally on a thread pool.

    Results are returned in the order of ``items`` regardless of the number
    of threads.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def write_csv(frame, path):
    """
    Write a :class:`pandas.DataFrame` with fixed column order, no index and
    reals in 17 significant digits.
    """
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT,
                 lineterminator="\n")
    _logger.info("wrote %s (%d rows)", path, len(frame))
