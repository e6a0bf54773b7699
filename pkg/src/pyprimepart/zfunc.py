"""
The logarithm of the prime bosonic partition function

.. math::

    \\ln Z(\\beta) = -\\sum_p \\ln(1 - e^{-\\beta p})

evaluated three ways: the exact sum over sieved primes, the principal-value
integral over the average prime density :math:`1/\\ln x`, and the two-term
small-β expansion with the constants :math:`f_1, f_2`.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

F1 = math.pi ** 2 / 6
#: value of f2 as quoted with six significant digits
F2_QUOTED = 1.88703
F2_MODES = ("paper", "converged")

#: Chebyshev-type factor bounding the prime density against 1/ln x
_DENSITY_FACTOR = 1.25506
_GL_NODES, _GL_WEIGHTS = leggauss(20)


class SieveTooSmallError(ValueError):
    """Primes beyond the sieve contribute more than the requested tolerance."""

    def __init__(self, message, required_limit):
        super().__init__(message)
        self.required_limit = required_limit


class ConvergenceError(RuntimeError):
    """The principal-value limit did not settle over the epsilon sequence."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass(frozen=True)
class ZConstants:
    """
    Constants of the small-β expansion of ln Z.

    Attributes
    ----------
    f1 : float
        :math:`\\pi^2/6`.
    f2 : float
        :math:`C\\pi^2/6 + \\sum_{k\\geq 2} \\ln k / k^2`.
    euler_c : float
        Euler's constant in full double precision.
    f2_sum_terms : int
        Number of terms k_max of the f2 sum, 0 for the quoted value.
    f2_tail_corrected : bool
        Whether the integral tail beyond k_max was added.
    """

    f1: float = F1
    f2: float = F2_QUOTED
    euler_c: float = float(np.euler_gamma)
    f2_sum_terms: int = 0
    f2_tail_corrected: bool = False

    @classmethod
    def from_mode(cls, mode="converged", k_max=10_000):
        """
        Build constants for an f2 mode.

        ``"paper"`` uses the quoted 1.88703, ``"converged"`` computes the
        tail-corrected sum up to ``k_max``.
        """
        if mode == "paper":
            return cls()
        if mode == "converged":
            return cls(f2=compute_f2(k_max, tail_corrected=True),
                       f2_sum_terms=int(k_max), f2_tail_corrected=True)
        raise ValueError(f"zfunc: f2 mode has to be in {F2_MODES}, got {mode!r}")


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Controls of the principal-value integral.

    Attributes
    ----------
    epsilon_sequence : tuple of float
        Strictly decreasing half-widths of the excluded window around x=1.
    upper_cutoff : float or None
        Upper integration limit, None for 45/β.
    panel_tolerance : float
        Absolute tolerance of the regular panels and of the epsilon limit.
    """

    epsilon_sequence: tuple = field(
        default=tuple(10.0 ** -k for k in range(2, 11)))
    upper_cutoff: float = None
    panel_tolerance: float = 1e-8

    def __post_init__(self):
        eps = np.asarray(self.epsilon_sequence, dtype=float)
        if len(eps) == 0:
            raise ValueError("zfunc: epsilon_sequence must not be empty")
        if np.any(eps <= 0) or np.any(eps >= 1):
            raise ValueError("zfunc: epsilon_sequence entries must lie in (0, 1)")
        if np.any(np.diff(eps) >= 0):
            raise ValueError("zfunc: epsilon_sequence must be strictly decreasing")
        if self.panel_tolerance <= 0:
            raise ValueError("zfunc: panel_tolerance must be positive")
        if self.upper_cutoff is not None and self.upper_cutoff <= 2:
            raise ValueError("zfunc: upper_cutoff must be > 2")

    def cutoff(self, beta):
        if self.upper_cutoff is not None:
            return float(self.upper_cutoff)
        return max(45.0 / beta, 4.0)


def compute_f2(k_max, tail_corrected=True):
    """
    :math:`C\\pi^2/6 + \\sum_{k=2}^{k_{max}} \\ln k/k^2`, optionally plus the
    integral tail :math:`(\\ln k_{max} + 1)/k_{max}`.

    Examples
    --------
    >>> round(compute_f2(10_000), 4)
    1.887

    """
    k_max = int(k_max)
    if k_max < 2:
        raise ValueError(f"zfunc: k_max must be >= 2, got {k_max}")
    k = np.arange(2, k_max + 1, dtype=float)
    # smallest terms first
    total = np.sum((np.log(k) / k ** 2)[::-1])
    if tail_corrected:
        total += (math.log(k_max) + 1.0) / k_max
    return float(np.euler_gamma) * F1 + float(total)


def _check_beta(beta):
    if not beta > 0:
        raise ValueError(f"zfunc: beta must be positive, got {beta}")


def _occupation(y):
    """-ln(1 - exp(-y)) for y > 0, accurate at both ends."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.where(y < math.log(2.0),
                        -np.log(-np.expm1(-y)),
                        -np.log1p(-np.exp(-y)))


def ln_z_exact_tail_bound(beta, limit):
    """
    Bound on the contribution of primes above ``limit``.

    Uses :math:`-\\ln(1-e^{-y}) \\leq e^{-y}/(1-e^{-y})` and a prime density
    below :math:`1.25506/\\ln x`.
    """
    _check_beta(beta)
    q = math.exp(-beta * limit)
    return _DENSITY_FACTOR * q / (beta * math.log(limit) * (1.0 - q))


def required_sieve_limit(beta, tol=1e-10):
    """Smallest sieve limit whose tail bound at ``beta`` is below ``tol``."""
    _check_beta(beta)
    limit = max(10.0, 1.0 / beta)
    for _ in range(100):
        if ln_z_exact_tail_bound(beta, limit) <= tol:
            break
        limit *= 1.1
    # walk back to the first limit that still satisfies the bound
    lo, hi = limit / 1.1, limit
    while hi - lo > 1:
        mid = 0.5 * (lo + hi)
        if ln_z_exact_tail_bound(beta, mid) <= tol:
            hi = mid
        else:
            lo = mid
    return int(math.ceil(hi))


def ln_z_exact(beta, sieve, tol=1e-10):
    """
    Exact :math:`\\ln Z(\\beta)` summed over all primes of ``sieve``.

    Parameters
    ----------
    beta : float
        Inverse temperature, > 0.
    sieve : :class:`pyprimepart.primes.PrimeSieve`
    tol : float, optional
        Largest admissible contribution of the primes beyond the sieve.
        The default is 1e-10.

    Raises
    ------
    SieveTooSmallError
        If the tail bound at ``sieve.limit`` exceeds ``tol``; the exception
        carries the sieve limit needed.

    Returns
    -------
    ln_z : float

    """
    _check_beta(beta)
    bound = ln_z_exact_tail_bound(beta, sieve.limit)
    if bound > tol:
        needed = required_sieve_limit(beta, tol)
        raise SieveTooSmallError(
            f"zfunc: sieve up to {sieve.limit} leaves a tail of {bound:.3g} "
            f"at beta={beta}; need a sieve up to {needed}", required_limit=needed)
    terms = _occupation(beta * sieve.primes.astype(float))
    return float(np.sum(terms))


def _avg_integrand(beta):
    def g(x):
        return float(_occupation(beta * x)) / math.log(x)
    return g


def _gauss_legendre_geometric(func, lo, hi, panels):
    """Composite Gauss-Legendre rule on geometrically growing panels."""
    edges = np.geomspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    nodes = mid + half * _GL_NODES[None, :]
    values = func(nodes) * (half * _GL_WEIGHTS[None, :])
    return float(np.sum(values))


def _pole_pair(beta):
    """g(1-t) + g(1+t); the 1/t parts cancel node by node."""
    def pair(t):
        left = _occupation(beta * (1.0 - t)) / np.log1p(-t)
        right = _occupation(beta * (1.0 + t)) / np.log1p(t)
        return left + right
    return pair


def _regular_panels(g, lo, hi, tol):
    """Adaptive quadrature on panels growing by a factor of 4."""
    if hi <= lo:
        return 0.0
    if lo <= 0:
        value, _ = integrate.quad(g, lo, hi, epsabs=tol, epsrel=1e-12,
                                  limit=200)
        return value
    n = max(1, int(math.ceil(math.log(hi / lo) / math.log(4.0))))
    edges = np.geomspace(lo, hi, n + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(g, a, b, epsabs=tol / n, epsrel=1e-12,
                                  limit=200)
        total += value
    return total


def ln_z_avg(a, beta, config=None):
    """
    Principal-value integral :math:`-⨍_a^\\infty dx\\,\\ln(1-e^{-\\beta x})/\\ln x`.

    For a < 1 the window around the pole at x=1 is integrated as the
    symmetric pair :math:`\\int_\\epsilon^\\delta [g(1-t) + g(1+t)]\\,dt`, and
    the limit ε → 0 is taken along ``config.epsilon_sequence``.

    Parameters
    ----------
    a : float
        Lower limit in [0, 1) or (1, 2].
    beta : float
        Inverse temperature, > 0.
    config : :class:`QuadratureConfig`, optional

    Raises
    ------
    ConvergenceError
        If consecutive epsilon steps never agree to ``panel_tolerance``.

    Returns
    -------
    ln_z : float

    """
    _check_beta(beta)
    config = QuadratureConfig() if config is None else config
    if a == 1:
        raise ValueError("zfunc: lower limit a = 1 sits on the pole")
    if a < 0 or a > 2:
        raise ValueError(f"zfunc: lower limit must lie in [0, 2], got {a}")
    tol = config.panel_tolerance
    cutoff = config.cutoff(beta)
    g = _avg_integrand(beta)

    if a > 1:
        total = _regular_panels(g, a, cutoff, tol)
    else:
        delta = min(0.5, 1.0 - a)
        eps = [e for e in config.epsilon_sequence if e < delta]
        if not eps:
            raise ValueError(
                f"zfunc: no epsilon below the pole window half-width {delta}")
        pair = _pole_pair(beta)
        inner = _gauss_legendre_geometric(pair, eps[0], delta, 8)
        history = [(eps[0], inner)]
        converged = False
        for prev, e in zip(eps[:-1], eps[1:]):
            step = _gauss_legendre_geometric(pair, e, prev, 2)
            inner += step
            history.append((e, inner))
            _logger.debug("pv window eps=%g value=%.17g", e, inner)
            if abs(step) < tol:
                converged = True
                break
        if not converged:
            raise ConvergenceError(
                f"zfunc: principal value at beta={beta} not converged down to "
                f"eps={eps[-1]}", history)
        total = _regular_panels(g, a, 1.0 - delta, tol) + inner
        total += _regular_panels(g, 1.0 + delta, cutoff, tol)

    tail = math.exp(-beta * cutoff) / (beta * math.log(cutoff))
    return total + tail


def ln_z_avg_cauchy(a, beta, config=None):
    """
    Same integral as :func:`ln_z_avg`, with the pole handled by QUADPACK's
    Cauchy-weighted rule. Used as an independent cross-check.
    """
    _check_beta(beta)
    config = QuadratureConfig() if config is None else config
    if a == 1:
        raise ValueError("zfunc: lower limit a = 1 sits on the pole")
    if a < 0 or a > 2:
        raise ValueError(f"zfunc: lower limit must lie in [0, 2], got {a}")
    cutoff = config.cutoff(beta)
    g = _avg_integrand(beta)
    points = list(np.geomspace(2.0, cutoff, 12)[1:-1])

    def q(x):
        t = x - 1.0
        if t == 0.0:
            return float(_occupation(beta))
        return float(_occupation(beta * x)) * t / math.log1p(t)

    if a > 1:
        total, _ = integrate.quad(g, a, cutoff, points=points, limit=500,
                                  epsabs=config.panel_tolerance, epsrel=1e-12)
    else:
        delta = min(0.5, 1.0 - a)
        lo, hi = 1.0 - delta, 1.0 + 0.75 * delta
        total = 0.0
        if a < lo:
            left, _ = integrate.quad(g, a, lo, limit=200,
                                     epsabs=config.panel_tolerance, epsrel=1e-12)
            total += left
        window, _ = integrate.quad(q, lo, hi, weight="cauchy", wvar=1.0,
                                   epsabs=config.panel_tolerance, epsrel=1e-12)
        right, _ = integrate.quad(g, hi, cutoff, points=points, limit=500,
                                  epsabs=config.panel_tolerance, epsrel=1e-12)
        total += window + right
    return total + math.exp(-beta * cutoff) / (beta * math.log(cutoff))


def ln_z_asymptotic(beta, constants=None):
    """
    Small-β expansion :math:`-f_1/(\\beta\\ln\\beta) + f_2/(\\beta\\ln^2\\beta)`.

    Accepts scalars or arrays; every β must lie in (0, 1).
    """
    constants = ZConstants.from_mode() if constants is None else constants
    b = np.asarray(beta, dtype=float)
    if np.any(b <= 0) or np.any(b >= 1):
        raise ValueError("zfunc: asymptotic form needs 0 < beta < 1")
    lb = np.log(b)
    value = -constants.f1 / (b * lb) + constants.f2 / (b * lb ** 2)
    return float(value) if value.ndim == 0 else value
