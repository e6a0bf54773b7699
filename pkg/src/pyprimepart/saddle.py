"""
Saddle-point evaluation of the density of prime partitions.

The entropy :math:`S(\\beta) = \\beta E + \\ln Z(\\beta)` is taken with the
two-term small-β form of :math:`\\ln Z` from :mod:`pyprimepart.zfunc`. Its
stationary point β₀ gives the log-density
:math:`S(\\beta_0) - \\frac{1}{2}\\ln(2\\pi S''(\\beta_0))`. The module also
holds the leading and next-to-leading closed forms for β₀ and the three
closed-form approximations of :math:`\\ln P(n)` (``lo``, ``vaughan`` and
``main``).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .zfunc import ZConstants, ln_z_exact

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

VARIANTS = ("lo", "vaughan", "main")
ENTROPY_MODES = ("truncated", "exact")

# the truncated saddle equation has a second, unphysical root close to 1
_BETA_CEILING = 0.99
_BETA_CEILING_EXACT = 20.0


class BracketError(ValueError):
    """No sign change of S'(β) was found."""


class ConvergenceError(RuntimeError):
    """The saddle iteration hit its iteration cap."""


@dataclass(frozen=True)
class SaddleSolution:
    """
    Solution of the saddle-point equation at energy E.

    Attributes
    ----------
    energy : float
    beta0 : float
        Stationary point of the entropy.
    entropy : float
        S(β₀).
    s2 : float
        S''(β₀), positive at a true saddle.
    iterations : int
    residual : float
        |S'(β₀)| / E.
    """

    energy: float
    beta0: float
    entropy: float
    s2: float
    iterations: int
    residual: float


def _constants(constants):
    return ZConstants.from_mode() if constants is None else constants


def _check_domain(beta, E, strict_energy=True):
    b = np.asarray(beta, dtype=float)
    if np.any(b <= 0) or np.any(b >= 1):
        raise ValueError("saddle: beta must lie in (0, 1)")
    e = np.asarray(E, dtype=float)
    if np.any(e <= 0) if strict_energy else np.any(e < 0):
        raise ValueError("saddle: energy out of domain")
    return b, e


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def entropy(beta, E, constants=None):
    """βE - f₁/(β ln β) + f₂/(β ln²β)."""
    c = _constants(constants)
    b, e = _check_domain(beta, E)
    lb = np.log(b)
    return _out(b * e - c.f1 / (b * lb) + c.f2 / (b * lb ** 2))


def entropy_d1(beta, E, constants=None):
    """
    First derivative of the entropy in its truncated form
    E + f₁/(β² ln β) + (f₁ - f₂)/(β² ln²β).
    """
    c = _constants(constants)
    b, e = _check_domain(beta, E, strict_energy=False)
    lb = np.log(b)
    return _out(e + c.f1 / (b ** 2 * lb) + (c.f1 - c.f2) / (b ** 2 * lb ** 2))


def entropy_d2(beta, E, constants=None):
    """
    Second derivative in truncated form
    -2f₁/(β³ ln β) - (3f₁ - 2f₂)/(β³ ln²β). Independent of E.
    """
    c = _constants(constants)
    b, _ = _check_domain(beta, E, strict_energy=False)
    lb = np.log(b)
    return _out(-2 * c.f1 / (b ** 3 * lb)
                - (3 * c.f1 - 2 * c.f2) / (b ** 3 * lb ** 2))


def entropy_d1_full(beta, E, constants=None):
    """Exact first derivative of :func:`entropy`."""
    c = _constants(constants)
    b, e = _check_domain(beta, E, strict_energy=False)
    lb = np.log(b)
    return _out(entropy_d1(b, e, c) - 2 * c.f2 / (b ** 2 * lb ** 3))


def entropy_d2_full(beta, E, constants=None):
    """Exact second derivative of :func:`entropy`."""
    c = _constants(constants)
    b, e = _check_domain(beta, E, strict_energy=False)
    lb = np.log(b)
    return _out(entropy_d2(b, e, c)
                - (2 * c.f1 - 6 * c.f2) / (b ** 3 * lb ** 3)
                + 6 * c.f2 / (b ** 3 * lb ** 4))


def _check_energy(E):
    if E < 3:
        raise ValueError(f"saddle: closed forms need E >= 3, got {E}")


def beta0_lo(E):
    """Leading-order saddle 1/√((3/π²) E ln E)."""
    e = np.asarray(E, dtype=float)
    _check_energy(np.min(e))
    return _out(1.0 / np.sqrt(3.0 / math.pi ** 2 * e * np.log(e)))


def beta0_nlo(E, constants=None):
    """
    Next-to-leading-order saddle
    π/√(3E ln E)·[1 - ½ lnln E/ln E + (ln(π/√3) + f₂/f₁ - 1)/ln E].
    """
    c = _constants(constants)
    e = np.asarray(E, dtype=float)
    _check_energy(np.min(e))
    le = np.log(e)
    bracket = (1.0 - 0.5 * np.log(le) / le
               + (math.log(math.pi / math.sqrt(3.0)) + c.f2 / c.f1 - 1.0) / le)
    return _out(math.pi * np.sqrt(1.0 / (3.0 * e * le)) * bracket)


class _ExactEntropy:
    """S(β) = βE + ln Z_exact(β) and its derivatives over the sieve."""

    def __init__(self, E, sieve):
        self.E = E
        self.sieve = sieve
        self.p = sieve.primes.astype(float)

    def d1(self, beta):
        return self.E - float(np.sum(self.p / np.expm1(beta * self.p)))

    def d2(self, beta):
        x = beta * self.p
        with np.errstate(over="ignore"):
            w = np.exp(-x) / (-np.expm1(-x)) ** 2
        return float(np.sum(self.p ** 2 * w))

    def value(self, beta):
        return beta * self.E + ln_z_exact(beta, self.sieve)


class _TruncatedEntropy:
    def __init__(self, E, constants):
        self.E = E
        self.constants = constants

    def d1(self, beta):
        return entropy_d1(beta, self.E, self.constants)

    def d2(self, beta):
        return entropy_d2(beta, self.E, self.constants)

    def value(self, beta):
        return entropy(beta, self.E, self.constants)


def _bracket(d1, guess, ceiling):
    """
    Find lo < hi with d1(lo) < 0 < d1(hi) around the leading-order guess,
    expanding the lower end geometrically and scanning the upper end
    toward ``ceiling``.
    """
    lo = guess / 4.0
    for _ in range(60):
        if d1(lo) < 0:
            break
        lo /= 4.0
    else:
        raise BracketError("saddle: no negative S' found below the guess")

    hi = min(4.0 * guess, ceiling)
    if d1(hi) > 0:
        return lo, hi
    for hi in np.geomspace(lo, ceiling, 400)[1:]:
        if d1(hi) > 0:
            return lo, float(hi)
    raise BracketError(
        "saddle: S'(beta) has no sign change in "
        f"[{lo:.3g}, {ceiling}], energy outside the domain of the formula")


def solve_saddle(E, constants=None, tol=1e-12, max_iter=200,
                 entropy="truncated", sieve=None):
    """
    Solve S'(β) = 0 for the saddle point β₀.

    The root is bracketed from the leading-order closed form and refined by
    Newton steps on S'', falling back to bisection whenever a step leaves
    the bracket or fails to halve the residual.

    Parameters
    ----------
    E : float
        Energy (identified with n), >= 2.
    constants : :class:`pyprimepart.zfunc.ZConstants`, optional
    tol : float, optional
        Target of the scaled residual |S'(β₀)|/E. The default is 1e-12.
    max_iter : int, optional
        The default is 200.
    entropy : str in {"truncated", "exact"}, optional
        ``"exact"`` replaces the two-term ln Z by the sum over ``sieve``.
    sieve : :class:`pyprimepart.primes.PrimeSieve`, optional
        Required for ``entropy="exact"``.

    Raises
    ------
    BracketError
        If no sign change exists (E below about 11.3 for the truncated
        entropy).
    ConvergenceError
        If ``max_iter`` is exceeded.

    Returns
    -------
    solution : :class:`SaddleSolution`

    """
    c = _constants(constants)
    if E < 2:
        raise ValueError(f"saddle: energy must be >= 2, got {E}")
    if tol <= 0:
        raise ValueError(f"saddle: tolerance must be positive, got {tol}")
    if entropy == "truncated":
        model = _TruncatedEntropy(E, c)
        ceiling = _BETA_CEILING
    elif entropy == "exact":
        if sieve is None:
            raise ValueError("saddle: exact entropy needs a sieve")
        model = _ExactEntropy(E, sieve)
        ceiling = _BETA_CEILING_EXACT
    else:
        raise ValueError(
            f"saddle: entropy has to be in {ENTROPY_MODES}, got {entropy!r}")

    guess = beta0_lo(max(E, 3.0))
    lo, hi = _bracket(model.d1, guess, ceiling)
    x = 0.5 * (lo + hi)
    f = model.d1(x)
    for it in range(1, max_iter + 1):
        if abs(f) / E < tol:
            break
        if f < 0:
            lo = x
        else:
            hi = x
        slope = model.d2(x)
        newton = x - f / slope if slope > 0 else None
        if newton is not None and lo < newton < hi:
            f_new = model.d1(newton)
            if abs(f_new) <= 0.5 * abs(f):
                x, f = newton, f_new
                _logger.debug("saddle E=%g it=%d newton beta=%.17g", E, it, x)
                continue
        x = 0.5 * (lo + hi)
        f = model.d1(x)
        _logger.debug("saddle E=%g it=%d bisect beta=%.17g", E, it, x)
        if hi - lo <= 4 * np.finfo(float).eps * x:
            break
    else:
        raise ConvergenceError(
            f"saddle: no convergence at E={E} after {max_iter} iterations "
            f"(residual {abs(f) / E:.3g})")
    residual = abs(f) / E
    if residual >= tol:
        raise ConvergenceError(
            f"saddle: bracket collapsed at E={E} with residual {residual:.3g}")

    s2 = model.d2(x)
    return SaddleSolution(energy=float(E), beta0=float(x),
                          entropy=float(model.value(x)), s2=float(s2),
                          iterations=it, residual=residual)


def rho_saddle(solution):
    """Log-density S(β₀) - ½ ln(2π S''(β₀)), cumulants neglected."""
    if not solution.s2 > 0:
        raise ValueError(
            f"saddle: S''(beta0) = {solution.s2} is not positive, no saddle")
    return solution.entropy - 0.5 * math.log(2 * math.pi * solution.s2)


@dataclass(frozen=True)
class AsymptoticFormula:
    """
    Closed-form approximation of ln P(n).

    Attributes
    ----------
    variant : str in {"lo", "vaughan", "main"}
    constants : :class:`pyprimepart.zfunc.ZConstants`
    """

    variant: str
    constants: ZConstants = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(
                f"saddle: variant has to be in {VARIANTS}, got {self.variant!r}")
        if self.constants is None:
            object.__setattr__(self, "constants", ZConstants.from_mode())

    def log_p(self, n):
        n = np.asarray(n, dtype=float)
        if np.any(n < 3):
            raise ValueError("saddle: closed forms need n >= 3")
        ln_n = np.log(n)
        lo = 2 * math.pi * np.sqrt(n / (3 * ln_n))
        if self.variant == "lo":
            return _out(lo)
        prefactor = -np.log(2 * (3 * ln_n) ** 0.25 * n ** 0.75)
        lnln = np.log(ln_n) / ln_n
        if self.variant == "vaughan":
            return _out(prefactor + lo * (1 + lnln))
        c = self.constants
        shift = (c.f2 / c.f1 + math.log(math.pi / math.sqrt(3.0))) / ln_n
        return _out(prefactor + lo * (1 - 0.5 * lnln + shift))


def log_p_formula(n, variant, constants=None):
    """ln P(n) from the ``lo``, ``vaughan`` or ``main`` closed form."""
    return AsymptoticFormula(variant, constants).log_p(n)
