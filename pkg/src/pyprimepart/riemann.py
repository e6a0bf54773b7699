"""
Prime density from the zeros of the Riemann zeta function.

The density of primes is written as a smooth part plus oscillating terms,
one per nontrivial zero 1/2 + iα and Möbius index m:

.. math::

    g(x) = \\frac{1}{x \\ln x} \\sum_{m=1}^{m_{max}} \\frac{\\mu(m)}{m}
           \\Big[x^{1/m} - \\frac{1}{x^{2/m}-1}
           - 2 x^{1/(2m)} \\sum_\\alpha W \\cos\\big(\\tfrac{\\alpha}{m}\\ln x\\big)\\Big]

Coarse-graining with a Gaussian of width γ damps each term by
:math:`W = \\exp(-\\frac{1}{2}(\\gamma\\alpha/(m x))^2)`, the Gaussian of its
local wavenumber in x. The result is compared against the direct comb of
unit Gaussians at the primes.

Zeros are read from plain text files; they are never computed here.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from numba import njit

from .primes import build_sieve, moebius, moebius_table, prime_pi, primes_up_to
from .utils import chunk_bounds, parallel_map

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

FIRST_ZERO = 14.134725141734695
FIRST_ZERO_WINDOW = (14.13, 14.14)
#: zeros per partial sum; fixed so sums do not depend on the thread count
ZERO_BLOCK = 256
#: half-width of the Gaussian window in units of γ
GAUSS_REACH = 8.0
METHODS = ("local", "convolve")

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class ZerosFileError(ValueError):
    """Invalid zeros file; ``lineno`` points to the offending line."""

    def __init__(self, message, lineno=None):
        super().__init__(message)
        self.lineno = lineno


class ZerosParseError(ZerosFileError):
    pass


class ZerosOrderError(ZerosFileError):
    pass


class ZerosAnchorError(ZerosFileError):
    pass


class InsufficientZerosError(ValueError):
    """Fewer zeros loaded than an evaluation asks for."""


@dataclass(frozen=True, eq=False)
class ZerosTable:
    """
    Imaginary parts α > 0 of nontrivial zeros, strictly increasing.

    Attributes
    ----------
    alphas : 1D :class:`numpy.ndarray` of float64
    source : str
        File the zeros were read from.
    """

    alphas: np.ndarray
    source: str

    @property
    def count(self):
        return len(self.alphas)

    def first(self, n):
        if n > self.count:
            raise InsufficientZerosError(
                f"riemann: {n} zeros requested, {self.source} holds {self.count}")
        return self.alphas[:n]


@dataclass(frozen=True)
class SmoothingConfig:
    """
    Attributes
    ----------
    gamma : float
        Width of the Gaussian in x units.
    m_max : int
        Largest Möbius index.
    zeros_used : int
        Number of zeros entering the oscillating sums.
    """

    gamma: float = 0.1
    m_max: int = 14
    zeros_used: int = 3000

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"riemann: gamma must be positive, got {self.gamma}")
        if self.m_max < 1:
            raise ValueError(f"riemann: m_max must be >= 1, got {self.m_max}")
        if self.zeros_used < 1:
            raise ValueError(
                f"riemann: zeros_used must be >= 1, got {self.zeros_used}")


def bundled_zeros_path():
    """Path of the zeros file shipped with the package (first 3000 zeros)."""
    return Path(__file__).parent / "data" / "zeros_first3000.txt"


def load_zeros(path=None):
    """
    Read a zeros file.

    One decimal value per line in ascending order; blank lines and lines
    starting with ``#`` are skipped.

    Raises
    ------
    ZerosParseError
        Unparsable or non-positive entry, or no entries at all.
    ZerosOrderError
        Entries not strictly increasing.
    ZerosAnchorError
        First entry outside [14.13, 14.14].
    """
    path = bundled_zeros_path() if path is None else Path(path)
    values = []
    previous = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                alpha = float(text)
            except ValueError:
                raise ZerosParseError(
                    f"riemann: {path}:{lineno}: cannot parse {text!r}",
                    lineno) from None
            if not math.isfinite(alpha) or alpha <= 0:
                raise ZerosParseError(
                    f"riemann: {path}:{lineno}: zero must be positive, got {text}",
                    lineno)
            if previous is None:
                lo, hi = FIRST_ZERO_WINDOW
                if not lo <= alpha <= hi:
                    raise ZerosAnchorError(
                        f"riemann: {path}:{lineno}: first zero {alpha} is not "
                        f"in [{lo}, {hi}]", lineno)
            elif alpha <= previous:
                raise ZerosOrderError(
                    f"riemann: {path}:{lineno}: {alpha} does not exceed the "
                    f"previous zero {previous}", lineno)
            values.append(alpha)
            previous = alpha
    if not values:
        raise ZerosParseError(f"riemann: {path} contains no zeros")
    alphas = np.array(values, dtype=np.float64)
    alphas.flags.writeable = False
    _logger.info("loaded %d zeros from %s", len(alphas), path)
    return ZerosTable(alphas=alphas, source=str(path))


def pi_refined(x, n_terms=1):
    """Σ_{j=1}^{n_terms} (j-1)! x / ln(x)^j."""
    if not x > 1:
        raise ValueError(f"riemann: x must be > 1, got {x}")
    if n_terms < 1:
        raise ValueError(f"riemann: n_terms must be >= 1, got {n_terms}")
    lx = math.log(x)
    return sum(math.factorial(j - 1) * x / lx ** j
               for j in range(1, n_terms + 1))


def g_avg(x):
    """Average prime density 1/ln x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 1):
        raise ValueError("riemann: average density needs x > 1")
    out = 1.0 / np.log(x)
    return float(out) if out.ndim == 0 else out


def iroot(n, k):
    """
    Floor of the k-th root of a nonnegative integer, by integer Newton
    iteration from above.
    """
    if n < 0 or k < 1:
        raise ValueError(f"riemann: iroot({n}, {k}) undefined")
    if k == 1 or n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def _j_exact(n, sieve):
    """J at the integer n as an exact fraction."""
    total = Fraction(0)
    k = 1
    while (1 << k) <= n:
        total += Fraction(prime_pi(iroot(n, k), sieve), k)
        k += 1
    return total


def j_function(x, sieve):
    """
    Riemann's prime-power counting function
    J(x) = Σ_{n≥1} (1/n) #{p : pⁿ ≤ x}.

    Raises
    ------
    SieveRangeError
        If x exceeds the sieve.
    """
    if x < 0:
        raise ValueError(f"riemann: J(x) needs x >= 0, got {x}")
    return float(_j_exact(int(math.floor(x)), sieve))


def pi_from_j(x, sieve):
    """
    π(x) reconstructed as Σ_m μ(m)/m · J(x^{1/m}), in exact arithmetic.
    """
    n = int(math.floor(x))
    total = Fraction(0)
    m = 1
    while (1 << m) <= n:
        mu = moebius(m, sieve)
        if mu:
            total += Fraction(mu, m) * _j_exact(iroot(n, m), sieve)
        m += 1
    if total.denominator != 1:
        raise ArithmeticError(f"riemann: Möbius inversion at x={x} gave {total}")
    return int(total)


@njit(nogil=True)
def _oscillating_sums(xs, alphas, m, gamma, smooth, block):
    """
    Σ_α W cos((α/m) ln x) for every x, in partial sums over fixed blocks of
    zeros. With smoothing, the sum stops once W underflows.
    """
    out = np.zeros(len(xs))
    n_blocks = (len(alphas) + block - 1) // block
    for i in range(len(xs)):
        x = xs[i]
        phase = np.log(x) / m
        scale = gamma / (m * x)
        total = 0.0
        for b in range(n_blocks):
            partial = 0.0
            done = False
            for j in range(b * block, min((b + 1) * block, len(alphas))):
                a = alphas[j]
                if smooth:
                    u = scale * a
                    if u > 9.0:
                        done = True
                        break
                    partial += np.exp(-0.5 * u * u) * np.cos(a * phase)
                else:
                    partial += np.cos(a * phase)
            total += partial
            if done:
                break
        out[i] = total
    return out


def _m_terms(x_max, m_max):
    """Möbius indices m <= m_max with μ(m) != 0 and 2^m <= x_max."""
    mu = moebius_table(build_sieve(max(m_max, 2)))
    return [(m, int(mu[m])) for m in range(1, m_max + 1)
            if 2.0 ** m <= x_max and mu[m] != 0]


def _trace_formula(xs, alphas, m_max, gamma, smooth, threads, reach):
    """Evaluate the (optionally damped) trace formula on an array of x."""
    out = np.zeros(len(xs))
    lnx = np.log(xs)
    for m, mu in _m_terms(float(np.max(xs)) + reach, m_max):
        # the term for m vanishes below x = 2^m; within reach of 2^m the
        # truncated spike there still enters the smoothing
        active = xs + reach >= 2.0 ** m
        xa = np.ascontiguousarray(xs[active])
        if len(xa) == 0:
            continue
        parts = parallel_map(
            lambda b: _oscillating_sums(xa[b[0]:b[1]], alphas, m, gamma,
                                        smooth, ZERO_BLOCK),
            chunk_bounds(len(xa), 512), threads)
        osc = np.concatenate(parts)
        y = xa ** (1.0 / m)
        bracket = y - 1.0 / (y ** 2 - 1.0) - 2.0 * xa ** (0.5 / m) * osc
        out[active] += mu / m * bracket
    return out / (xs * lnx)


@njit(nogil=True)
def _gauss_smooth(xs, grid, values, gamma, h, reach):
    out = np.zeros(len(xs))
    norm = h / (gamma * np.sqrt(2.0 * np.pi))
    x0 = grid[0]
    for i in range(len(xs)):
        lo = max(0, int(np.ceil((xs[i] - reach * gamma - x0) / h)))
        hi = min(len(grid), int(np.floor((xs[i] + reach * gamma - x0) / h)) + 1)
        total = 0.0
        for j in range(lo, hi):
            d = (xs[i] - grid[j]) / gamma
            total += values[j] * np.exp(-0.5 * d * d)
        out[i] = total * norm
    return out


def g_semiclassical(x, zeros, config=None, smooth=True, method="local",
                    threads=1):
    """
    Prime density from the trace formula over the zeros.

    Parameters
    ----------
    x : float or 1D array of floats
        Points > 1.
    zeros : :class:`ZerosTable`
    config : :class:`SmoothingConfig`, optional
    smooth : bool, optional
        Coarse-grain with a Gaussian of width ``config.gamma``. The default
        is True.
    method : str in {"local", "convolve"}, optional
        ``"local"`` damps every term by the Gaussian of its local
        wavenumber. ``"convolve"`` evaluates the undamped formula on a fine
        grid and convolves it numerically with the Gaussian.
    threads : int, optional
        Worker threads over x chunks; results do not depend on it.

    Raises
    ------
    InsufficientZerosError
        If ``config.zeros_used`` exceeds the table.

    Returns
    -------
    g : float or :class:`numpy.ndarray`

    """
    config = SmoothingConfig() if config is None else config
    if method not in METHODS:
        raise ValueError(f"riemann: method has to be in {METHODS}, got {method!r}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 1):
        raise ValueError("riemann: trace formula needs x > 1")
    alphas = np.ascontiguousarray(zeros.first(config.zeros_used))
    gamma = config.gamma

    if not smooth:
        out = _trace_formula(xs, alphas, config.m_max, gamma, False, threads, 0.0)
    elif method == "local":
        out = _trace_formula(xs, alphas, config.m_max, gamma, True, threads,
                             GAUSS_REACH * gamma)
    else:
        x_min, x_max = float(np.min(xs)), float(np.max(xs))
        lower = max(x_min - GAUSS_REACH * gamma, 0.5 * (1.0 + x_min))
        upper = x_max + GAUSS_REACH * gamma
        k_max = alphas[-1] / lower
        h = min(gamma / 20.0, math.pi / (2.0 * k_max))
        grid = lower + h * np.arange(int(math.ceil((upper - lower) / h)) + 1)
        _logger.debug("convolving on %d grid points (h=%.3g)", len(grid), h)
        raw = _trace_formula(grid, alphas, config.m_max, gamma, False,
                             threads, GAUSS_REACH * gamma)
        out = _gauss_smooth(xs, grid, raw, gamma, h, GAUSS_REACH)
    return float(out[0]) if np.ndim(x) == 0 else out


def gaussian_comb(x, sieve, gamma):
    """
    Σ_p exp(-(x-p)²/(2γ²)) / (γ√(2π)) over primes within 8γ of x.

    Only primes up to ``sieve.limit`` enter; Gaussians of larger primes are
    missing near the end of the sieve.
    """
    if not gamma > 0:
        raise ValueError(f"riemann: gamma must be positive, got {gamma}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    upper = min(float(np.max(xs)) + GAUSS_REACH * gamma, sieve.limit)
    primes = primes_up_to(sieve, upper).astype(float)
    out = np.zeros(len(xs))
    for lo, hi in chunk_bounds(len(xs), 4096):
        d = (xs[lo:hi, None] - primes[None, :]) / gamma
        w = np.where(np.abs(d) <= GAUSS_REACH, np.exp(-0.5 * d * d), 0.0)
        out[lo:hi] = np.sum(w, axis=1) / (gamma * _SQRT_2PI)
    return float(out[0]) if np.ndim(x) == 0 else out
