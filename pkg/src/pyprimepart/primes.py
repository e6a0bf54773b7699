"""
Prime sieving and the arithmetic tables derived from it.

The sieve stores the smallest prime factor of every integer up to its limit.
Everything else in this module is read off that table: the prime set, the sum
of distinct prime factors :math:`\\mathscr{S}(n)` that drives the exact
recursion in :mod:`pyprimepart.exact`, and the Möbius function used by
:mod:`pyprimepart.riemann`.

The heavy loops are compiled with numba. Finished tables are flagged
read-only, so a sieve can be shared between worker threads.
"""
import logging
import os
from dataclasses import dataclass

import numpy as np
from numba import njit

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

#: Largest sieve (number of table entries) built without an explicit override.
#: Can be raised with the ``PYPRIMEPART_MAX_SIEVE`` environment variable.
DEFAULT_MAX_SIEVE = 200_000_000


class SieveRangeError(ValueError):
    """Query outside of the sieve range; rebuild with ``required_limit``."""

    def __init__(self, message, required_limit):
        super().__init__(message)
        self.required_limit = required_limit


class ResourceLimitError(MemoryError):
    """Requested sieve exceeds the configured memory budget."""


@dataclass(frozen=True, eq=False)
class PrimeSieve:
    """
    Smallest-prime-factor sieve up to ``limit``.

    Attributes
    ----------
    limit : int
        Largest integer covered by the tables.
    is_prime : 1D :class:`numpy.ndarray` of bool
        ``is_prime[k]`` is True iff k is prime.
    smallest_factor : 1D :class:`numpy.ndarray` of int32
        Smallest prime dividing k, 0 for k < 2.
    primes : 1D :class:`numpy.ndarray` of int64
        All primes up to ``limit`` in ascending order.
    """

    limit: int
    is_prime: np.ndarray
    smallest_factor: np.ndarray
    primes: np.ndarray


@dataclass(frozen=True, eq=False)
class SopfTable:
    """
    Sum of distinct prime factors, ``values[n]`` for 0 <= n <= limit.

    ``values[0]`` is unused and set to 0.
    """

    limit: int
    values: np.ndarray


def max_sieve_limit():
    """Memory budget for sieves (number of entries)."""
    return int(os.environ.get("PYPRIMEPART_MAX_SIEVE", DEFAULT_MAX_SIEVE))


@njit
def _linear_sieve(limit):
    """
    Linear sieve: every composite is crossed out exactly once, by its
    smallest prime factor.
    """
    spf = np.zeros(limit + 1, dtype=np.int32)
    primes = np.empty(limit // 2 + 2, dtype=np.int64)
    n_primes = 0
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            primes[n_primes] = i
            n_primes += 1
        for j in range(n_primes):
            p = primes[j]
            if p > spf[i] or i * p > limit:
                break
            spf[i * p] = p
    return spf, primes[:n_primes].copy()


@njit
def _sopf_values(spf):
    values = np.zeros(len(spf), dtype=np.int64)
    for n in range(2, len(spf)):
        p = spf[n]
        m = n // p
        while m % p == 0:
            m //= p
        values[n] = values[m] + p
    return values


@njit
def _sopf_single(n, spf):
    total = 0
    while n > 1:
        p = spf[n]
        total += p
        while n % p == 0:
            n //= p
    return total


@njit
def _moebius_values(spf):
    mu = np.zeros(len(spf), dtype=np.int8)
    if len(spf) > 1:
        mu[1] = 1
    for n in range(2, len(spf)):
        p = spf[n]
        m = n // p
        if m % p == 0:
            mu[n] = 0
        else:
            mu[n] = -mu[m]
    return mu


@njit
def _moebius_single(m, spf):
    sign = 1
    while m > 1:
        p = spf[m]
        m //= p
        if m % p == 0:
            return 0
        sign = -sign
    return sign


def build_sieve(limit):
    """
    Build the smallest-prime-factor sieve up to ``limit``.

    Parameters
    ----------
    limit : int
        Largest integer to sieve, needs to be >= 2.

    Raises
    ------
    ValueError
        If ``limit`` < 2.
    ResourceLimitError
        If ``limit`` exceeds :func:`max_sieve_limit`.

    Returns
    -------
    sieve : :class:`PrimeSieve`

    """
    limit = int(limit)
    if limit < 2:
        raise ValueError(f"primes: sieve limit must be >= 2, got {limit}")
    budget = max_sieve_limit()
    if limit > budget:
        raise ResourceLimitError(
            f"primes: sieve limit {limit} exceeds the memory budget of {budget} "
            "entries (set PYPRIMEPART_MAX_SIEVE to raise it)")

    spf, primes = _linear_sieve(limit)
    is_prime = np.zeros(limit + 1, dtype=bool)
    is_prime[primes] = True
    for arr in (spf, primes, is_prime):
        arr.flags.writeable = False
    _logger.debug("sieved %d primes up to %d", len(primes), limit)
    return PrimeSieve(limit=limit, is_prime=is_prime, smallest_factor=spf,
                      primes=primes)


def _check_range(n, sieve, name):
    if n < 1 or n > sieve.limit:
        raise SieveRangeError(
            f"primes: {name}({n}) outside of sieve range 1..{sieve.limit}",
            required_limit=max(int(n), 2))


def sopf(n, sieve):
    """
    Sum of the distinct primes dividing ``n``; 𝒮(1) = 0.

    Examples
    --------
    >>> s = build_sieve(100)
    >>> sopf(52, s)
    15

    """
    n = int(n)
    _check_range(n, sieve, "sopf")
    return int(_sopf_single(n, sieve.smallest_factor))


def build_sopf_table(sieve, limit=None):
    """
    Tabulate 𝒮(n) for all n up to ``limit`` (default: the sieve limit).
    """
    limit = sieve.limit if limit is None else int(limit)
    if limit > sieve.limit:
        raise SieveRangeError(
            f"primes: sopf table up to {limit} needs a larger sieve "
            f"(limit {sieve.limit})", required_limit=limit)
    values = _sopf_values(sieve.smallest_factor[:limit + 1])
    values.flags.writeable = False
    return SopfTable(limit=limit, values=values)


def moebius(m, sieve):
    """
    Möbius function μ(m).

    Returns 1 for m = 1, 0 if m has a squared prime factor and
    (-1)**k for a product of k distinct primes otherwise.
    """
    m = int(m)
    _check_range(m, sieve, "moebius")
    return int(_moebius_single(m, sieve.smallest_factor))


def moebius_table(sieve, limit=None):
    """μ(m) for 0 <= m <= limit as int8 array (entry 0 is 0)."""
    limit = sieve.limit if limit is None else int(limit)
    if limit > sieve.limit:
        raise SieveRangeError(
            f"primes: moebius table up to {limit} needs a larger sieve",
            required_limit=limit)
    return _moebius_values(sieve.smallest_factor[:limit + 1])


def prime_pi(x, sieve):
    """Exact prime counting function π(x) for x <= sieve.limit."""
    if x > sieve.limit:
        raise SieveRangeError(
            f"primes: pi({x}) outside of sieve range", required_limit=int(x))
    return int(np.searchsorted(sieve.primes, np.floor(x), side="right"))


def primes_up_to(sieve, x):
    """Sorted array of all primes <= x."""
    return sieve.primes[:prime_pi(x, sieve)]
