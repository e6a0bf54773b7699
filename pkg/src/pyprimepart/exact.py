"""
Exact counts of unrestricted prime partitions P(n).

Two independent algorithms fill a :class:`PartitionTable` of Python integers:

* :func:`build_recursion` uses the classical identity
  ``n P(n) = sum_{k=1}^{n} S(k) P(n-k)`` with S the sum of distinct prime
  factors. Every division by n is checked to be exact.
* :func:`build_euler_dp` expands the generating function
  ``prod_p 1/(1 - q^p)`` one prime at a time (coin-change dynamic program).
  This is the default production algorithm.

Tables can be written to and restored from a versioned binary checkpoint
and continued from their last index with :func:`extend_table`.
"""
import hashlib
import itertools
import logging
import math
import os
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .primes import SieveRangeError
from .utils import chunk_bounds, parallel_map, write_csv

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

ALGORITHMS = ("recursion", "euler_dp")

CHECKPOINT_MAGIC = b"PPCT"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sHBQ")  # magic, version, algorithm code, n_max
_LENGTH = struct.Struct("<I")
_DIGEST_SIZE = hashlib.sha256().digest_size

LN2 = math.log(2.0)


class InexactDivisionError(ArithmeticError):
    """The recursion bracket was not divisible by n."""

    def __init__(self, n, remainder):
        super().__init__(
            f"exact: recursion bracket at n={n} leaves remainder {remainder}")
        self.n = n
        self.remainder = remainder


class CheckpointError(ValueError):
    """Base class of all checkpoint format errors."""


class CheckpointCorruptError(CheckpointError):
    """Checksum mismatch, bad magic or trailing garbage."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint written by an incompatible format version."""


class CheckpointTruncatedError(CheckpointError):
    """Checkpoint file ends before its declared content."""


@dataclass(frozen=True)
class CheckpointMeta:
    """Where a table was loaded from and the last index it covered then."""

    source: str
    last_index: int


@dataclass(eq=False)
class PartitionTable:
    """
    Prime partition counts P(0..n_max).

    Attributes
    ----------
    counts : 1D :class:`numpy.ndarray` of object
        Python integers, ``counts[n] = P(n)``.
    algorithm_tag : str in {"recursion", "euler_dp"}
    checkpoint_meta : :class:`CheckpointMeta` or None
    """

    counts: np.ndarray
    algorithm_tag: str
    checkpoint_meta: CheckpointMeta = field(default=None)

    def __post_init__(self):
        if self.algorithm_tag not in ALGORITHMS:
            raise ValueError(
                f"exact: algorithm_tag has to be in {ALGORITHMS}, "
                f"got {self.algorithm_tag!r}")

    @property
    def n_max(self):
        return len(self.counts) - 1

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, n):
        return self.counts[n]

    def same_counts(self, other):
        """Entry-by-entry equality of the counts (metadata ignored)."""
        return (len(self) == len(other)
                and all(a == b for a, b in zip(self.counts, other.counts)))


def _empty_counts(n_max):
    counts = np.zeros(n_max + 1, dtype=object)
    counts[0] = 1
    return counts


def _recursion_fill(counts, start, sopf_values, checkpoint=None):
    """
    Fill ``counts[start:]`` in place with the recursion. ``counts[:start]``
    must already hold exact values.
    """
    n_max = len(counts) - 1
    s = sopf_values[:n_max + 1].astype(object)
    for n in range(start, n_max + 1):
        # counts[n-1::-1] pairs S(k) with P(n-k) for k = 1..n
        bracket = np.dot(s[1:n + 1], counts[n - 1::-1])
        quotient, remainder = divmod(int(bracket), n)
        if remainder:
            raise InexactDivisionError(n, remainder)
        counts[n] = quotient
        if checkpoint is not None:
            checkpoint(n)
    return counts


def build_recursion(n_max, sopf, checkpoint_path=None, checkpoint_every=10_000):
    """
    Prime partition counts from the sum-of-prime-factors recursion.

    Parameters
    ----------
    n_max : int
        Largest n to compute, needs to be >= 0.
    sopf : :class:`pyprimepart.primes.SopfTable`
        Needs to cover ``n_max``.
    checkpoint_path : str or path-like, optional
        Write a checkpoint every ``checkpoint_every`` entries and at the end.
    checkpoint_every : int, optional
        Checkpoint interval in entries. The default is 10000.

    Raises
    ------
    InexactDivisionError
        If a bracket is not divisible by n (logic error, aborts the build).

    Returns
    -------
    table : :class:`PartitionTable`

    """
    n_max = _check_n_max(n_max)
    if sopf.limit < n_max:
        raise SieveRangeError(
            f"exact: sopf table up to {sopf.limit} does not cover n_max={n_max}",
            required_limit=n_max)
    t0 = time.perf_counter()
    counts = _empty_counts(n_max)
    hook = _checkpoint_hook(counts, "recursion", checkpoint_path,
                            checkpoint_every)
    _recursion_fill(counts, 1, sopf.values, hook)
    table = PartitionTable(counts=counts, algorithm_tag="recursion")
    _logger.info("recursion build up to n=%d took %.2f s", n_max,
                 time.perf_counter() - t0)
    if checkpoint_path is not None:
        checkpoint_save(table, checkpoint_path)
    return table


def build_euler_dp(n_max, sieve, checkpoint_path=None, checkpoint_every=10_000):
    """
    Prime partition counts from the product over primes of 1/(1-q^p).

    For each prime p in ascending order, ``counts[m] += counts[m-p]`` for
    m = p..n_max. The update runs in blocks of length p: a block only reads
    the block before it, which is already final for this prime.

    Parameters
    ----------
    n_max : int
        Largest n to compute, needs to be >= 0.
    sieve : :class:`pyprimepart.primes.PrimeSieve`
        Needs to cover ``n_max``.
    checkpoint_path : str or path-like, optional
        After prime p, the entries below the next prime are final. They are
        written as a (shorter) checkpoint every ``checkpoint_every`` entries.
    checkpoint_every : int, optional
        The default is 10000.

    Returns
    -------
    table : :class:`PartitionTable`

    """
    n_max = _check_n_max(n_max)
    if n_max >= 2 and sieve.limit < n_max:
        raise SieveRangeError(
            f"exact: sieve up to {sieve.limit} does not cover n_max={n_max}",
            required_limit=n_max)
    t0 = time.perf_counter()
    counts = _empty_counts(n_max)
    primes = [int(p) for p in sieve.primes[sieve.primes <= n_max]]
    next_mark = checkpoint_every
    for i, p in enumerate(primes):
        for start in range(p, n_max + 1, p):
            stop = min(start + p, n_max + 1)
            counts[start:stop] += counts[start - p:stop - p]
        if checkpoint_path is not None:
            # entries below the next prime no longer change
            final = primes[i + 1] if i + 1 < len(primes) else n_max + 1
            if final > next_mark and final <= n_max:
                partial = PartitionTable(counts=counts[:final].copy(),
                                         algorithm_tag="euler_dp")
                checkpoint_save(partial, checkpoint_path)
                _logger.info("checkpoint at n=%d after prime %d (%.1f s)",
                             final - 1, p, time.perf_counter() - t0)
                next_mark = final + checkpoint_every
        _logger.debug("prime %d done", p)
    table = PartitionTable(counts=counts, algorithm_tag="euler_dp")
    _logger.info("euler_dp build up to n=%d took %.2f s", n_max,
                 time.perf_counter() - t0)
    if checkpoint_path is not None:
        checkpoint_save(table, checkpoint_path)
    return table


def extend_table(table, n_max, sopf, checkpoint_path=None,
                 checkpoint_every=10_000):
    """
    Continue ``table`` up to ``n_max`` with the recursion.

    The per-prime dynamic program cannot be resumed from its final table, so
    new entries always come from the recursion, which only needs the
    finished lower entries. The result keeps the algorithm tag and the
    checkpoint lineage of ``table``.
    """
    n_max = _check_n_max(n_max)
    if n_max <= table.n_max:
        return PartitionTable(counts=table.counts[:n_max + 1].copy(),
                              algorithm_tag=table.algorithm_tag,
                              checkpoint_meta=table.checkpoint_meta)
    if sopf.limit < n_max:
        raise SieveRangeError(
            f"exact: sopf table up to {sopf.limit} does not cover n_max={n_max}",
            required_limit=n_max)
    _logger.info("resuming from n=%d up to n=%d", table.n_max, n_max)
    counts = np.concatenate(
        [table.counts, np.zeros(n_max - table.n_max, dtype=object)])
    hook = _checkpoint_hook(counts, table.algorithm_tag, checkpoint_path,
                            checkpoint_every)
    _recursion_fill(counts, table.n_max + 1, sopf.values, hook)
    extended = PartitionTable(counts=counts, algorithm_tag=table.algorithm_tag,
                              checkpoint_meta=table.checkpoint_meta)
    if checkpoint_path is not None:
        checkpoint_save(extended, checkpoint_path)
    return extended


def _check_n_max(n_max):
    if int(n_max) != n_max or n_max < 0:
        raise ValueError(f"exact: n_max must be a nonnegative integer, got {n_max}")
    return int(n_max)


def _checkpoint_hook(counts, tag, path, every):
    if path is None:
        return None
    t0 = time.perf_counter()

    def hook(n):
        if n % every == 0 and n < len(counts) - 1:
            checkpoint_save(
                PartitionTable(counts=counts[:n + 1].copy(), algorithm_tag=tag),
                path)
            _logger.info("checkpoint at n=%d (%.1f s)", n,
                         time.perf_counter() - t0)
    return hook


def log_count(table, n):
    """
    Natural logarithm of P(n).

    Only the leading 64 bits of the integer are converted to float; the
    rest enters through the bit length.

    Raises
    ------
    ValueError
        If P(n) = 0 (only n = 1).
    """
    count = table.counts[n]
    if count == 0:
        raise ValueError(f"exact: ln P({n}) undefined, P({n}) = 0")
    return _log_int(count)


def _log_int(value):
    bits = value.bit_length()
    if bits <= 64:
        return math.log(value)
    shift = bits - 64
    return math.log(value >> shift) + shift * LN2


def log_counts(table, threads=1, chunk=4096):
    """
    ln P(n) for all n as float array; NaN where P(n) = 0.
    """
    def work(bounds):
        lo, hi = bounds
        return [_log_int(c) if c else math.nan for c in table.counts[lo:hi]]

    parts = parallel_map(work, chunk_bounds(len(table), chunk), threads)
    return np.array(list(itertools.chain.from_iterable(parts)), dtype=float)


def digit_count(value):
    """Number of decimal digits of a nonnegative integer (1 for 0)."""
    if value < 10:
        return 1
    digits = int(math.log10(value)) + 1
    if 10 ** (digits - 1) > value:
        digits -= 1
    elif 10 ** digits <= value:
        digits += 1
    return digits


def verify_tables(first, second, chunk=4096, threads=1):
    """
    Compare two tables entry by entry.

    Returns
    -------
    mismatch : int or None
        First index where the counts differ, None if they agree on the
        common range.
    """
    n = min(len(first), len(second))

    def work(bounds):
        lo, hi = bounds
        diff = np.nonzero(first.counts[lo:hi] != second.counts[lo:hi])[0]
        return lo + int(diff[0]) if len(diff) else None

    hits = [m for m in parallel_map(work, chunk_bounds(n, chunk), threads)
            if m is not None]
    return hits[0] if hits else None


def enumerate_partitions(n, primes=None):
    """
    Count multisets of primes summing to ``n`` by brute force.

    Exponential in n; intended as a test oracle for small n.
    """
    if primes is None:
        primes = [p for p in range(2, n + 1)
                  if all(p % d for d in range(2, math.isqrt(p) + 1))]

    def count(rest, idx):
        if rest == 0:
            return 1
        total = 0
        for j in range(idx, len(primes)):
            p = primes[j]
            if p > rest:
                break
            total += count(rest - p, j)
        return total

    return count(n, 0)


def checkpoint_save(table, path):
    """
    Write ``table`` to ``path`` in the binary checkpoint format.

    Layout: header (magic ``PPCT``, uint16 version, uint8 algorithm code,
    uint64 n_max), then every count as uint32 byte length followed by its
    little-endian bytes, then the SHA-256 digest of everything before it.
    The file is written to a temporary name and moved into place.
    """
    path = Path(path)
    digest = hashlib.sha256()
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        def put(chunk):
            digest.update(chunk)
            fh.write(chunk)

        put(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
                         ALGORITHMS.index(table.algorithm_tag), table.n_max))
        for value in table.counts:
            value = int(value)
            raw = value.to_bytes((value.bit_length() + 7) // 8, "little")
            put(_LENGTH.pack(len(raw)))
            put(raw)
        fh.write(digest.digest())
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    _logger.debug("wrote checkpoint %s (n_max=%d)", path, table.n_max)


def checkpoint_load(path):
    """
    Read a table written by :func:`checkpoint_save`.

    Raises
    ------
    CheckpointTruncatedError
        File shorter than its declared content.
    CheckpointVersionError
        Unsupported format version.
    CheckpointCorruptError
        Bad magic, unknown algorithm code, trailing bytes or checksum
        mismatch.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise CheckpointTruncatedError(f"exact: {path} is truncated (header)")
    magic, version, code, n_max = _HEADER.unpack_from(data, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointCorruptError(f"exact: {path} is not a checkpoint file")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"exact: {path} has format version {version}, "
            f"expected {CHECKPOINT_VERSION}")
    if code >= len(ALGORITHMS):
        raise CheckpointCorruptError(f"exact: {path} has unknown algorithm {code}")
    if _HEADER.size + (n_max + 1) * _LENGTH.size + _DIGEST_SIZE > len(data):
        raise CheckpointTruncatedError(
            f"exact: {path} is too short for n_max={n_max}")

    counts = np.zeros(n_max + 1, dtype=object)
    pos = _HEADER.size
    for n in range(n_max + 1):
        if pos + _LENGTH.size > len(data):
            raise CheckpointTruncatedError(
                f"exact: {path} is truncated at entry {n}")
        (length,) = _LENGTH.unpack_from(data, pos)
        pos += _LENGTH.size
        if pos + length > len(data):
            raise CheckpointTruncatedError(
                f"exact: {path} is truncated at entry {n}")
        counts[n] = int.from_bytes(data[pos:pos + length], "little")
        pos += length
    if pos + _DIGEST_SIZE > len(data):
        raise CheckpointTruncatedError(f"exact: {path} is truncated (checksum)")
    if pos + _DIGEST_SIZE < len(data):
        raise CheckpointCorruptError(f"exact: {path} has trailing bytes")
    if hashlib.sha256(data[:pos]).digest() != data[pos:]:
        raise CheckpointCorruptError(f"exact: {path} failed the checksum test")

    _logger.info("loaded checkpoint %s (n_max=%d)", path, n_max)
    return PartitionTable(counts=counts, algorithm_tag=ALGORITHMS[code],
                          checkpoint_meta=CheckpointMeta(str(path), n_max))


def export_csv(table, path, full=False, threads=1):
    """
    Write n, decimal digit count, ln P(n) and optionally P(n) itself.
    """
    frame = pd.DataFrame({
        "n": np.arange(len(table), dtype=np.int64),
        "digits": [digit_count(int(c)) for c in table.counts],
        "ln_P": log_counts(table, threads=threads),
    })
    if full:
        frame["P"] = [str(c) for c in table.counts]
    write_csv(frame, path)
    return frame
