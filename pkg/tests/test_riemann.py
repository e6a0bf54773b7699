import math

import pytest
import numpy as np
from scipy import integrate

from pyprimepart.primes import build_sieve, prime_pi
from pyprimepart.riemann import (
    FIRST_ZERO,
    InsufficientZerosError,
    SmoothingConfig,
    ZerosAnchorError,
    ZerosOrderError,
    ZerosParseError,
    bundled_zeros_path,
    g_avg,
    g_semiclassical,
    gaussian_comb,
    iroot,
    j_function,
    load_zeros,
    pi_from_j,
    pi_refined,
)

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"


@pytest.fixture(scope="module")
def sieve_1000():
    return build_sieve(1000)


def _write(tmp_path, text):
    path = tmp_path / "zeros.txt"
    path.write_text(text, encoding="utf-8")
    return path


def test_bundled_zeros(zeros_bundled):
    assert zeros_bundled.count == 3000
    assert zeros_bundled.alphas[99] == pytest.approx(236.524229666, abs=1e-8)
    assert zeros_bundled.alphas[999] == pytest.approx(1419.422480946, abs=1e-8)
    assert zeros_bundled.alphas[0] == pytest.approx(FIRST_ZERO, abs=1e-9)
    assert np.all(np.diff(zeros_bundled.alphas) > 0)
    assert zeros_bundled.source == str(bundled_zeros_path())
    with pytest.raises(ValueError):
        zeros_bundled.alphas[0] = 1.0


def test_load_zeros_skips_comments(tmp_path):
    path = _write(tmp_path, "# header\n\n14.134725\n  21.022040  \n# tail\n")
    table = load_zeros(path)
    assert list(table.alphas) == [14.134725, 21.02204]


@pytest.mark.parametrize(
    "text, error, lineno",
    [
        ("14.1347\nabc\n", ZerosParseError, 2),
        ("14.1347\n-3.0\n", ZerosParseError, 2),
        ("# only a comment\n", ZerosParseError, None),
        ("14.1347\n21.02\n21.02\n", ZerosOrderError, 3),
        ("14.1347\n25.01\n21.02\n", ZerosOrderError, 3),
        ("# header\n21.022\n", ZerosAnchorError, 2),
    ],
)
def test_load_zeros_errors(text, error, lineno, tmp_path):
    with pytest.raises(error) as excinfo:
        load_zeros(_write(tmp_path, text))
    assert excinfo.value.lineno == lineno


def test_insufficient_zeros(zeros_bundled):
    assert len(zeros_bundled.first(10)) == 10
    with pytest.raises(InsufficientZerosError):
        zeros_bundled.first(3001)
    with pytest.raises(InsufficientZerosError):
        g_semiclassical(5.0, zeros_bundled, SmoothingConfig(zeros_used=5000))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"gamma": 0.0},
        {"m_max": 0},
        {"zeros_used": 0},
    ],
)
def test_smoothing_config_validation(kwargs):
    with pytest.raises(ValueError):
        SmoothingConfig(**kwargs)


def test_pi_refined():
    assert pi_refined(math.e ** 2, 1) == pytest.approx(math.e ** 2 / 2, rel=1e-14)
    one = pi_refined(1e6, 1)
    assert one == pytest.approx(72382.4, abs=0.1)
    assert abs(pi_refined(1e6, 3) - 78498) < abs(one - 78498)
    with pytest.raises(ValueError):
        pi_refined(1.0)


def test_g_avg_integrates_to_prime_count():
    total, _ = integrate.quad(g_avg, 2, 1e4, limit=200)
    assert abs(total - 1229) / 1229 < 0.15
    assert g_avg(np.array([math.e, math.e ** 2])) == pytest.approx([1.0, 0.5])
    with pytest.raises(ValueError):
        g_avg(1.0)


@pytest.mark.parametrize(
    "n, k, expected",
    [
        (0, 3, 0),
        (1, 2, 1),
        (26, 3, 2),
        (27, 3, 3),
        (10 ** 40, 2, 10 ** 20),
        (10 ** 40 - 1, 2, 10 ** 20 - 1),
        (2 ** 64, 64, 2),
    ],
)
def test_iroot(n, k, expected):
    assert iroot(n, k) == expected


@pytest.mark.parametrize(
    "x, expected",
    [
        (1.9, 0.0),
        (4, 2.5),
        (10, 16 / 3),
    ],
)
def test_j_function(x, expected, sieve_small):
    assert j_function(x, sieve_small) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("x", [10, 50, 100, 1000])
def test_pi_from_j(x, sieve_1000):
    assert pi_from_j(x, sieve_1000) == prime_pi(x, sieve_1000)


def test_gaussian_comb_values(sieve_small):
    assert gaussian_comb(2.0, sieve_small, 0.1) == pytest.approx(3.989, abs=1e-3)
    expected = 2 * math.exp(-12.5) / (0.1 * math.sqrt(2 * math.pi))
    assert gaussian_comb(2.5, sieve_small, 0.1) == pytest.approx(expected, rel=1e-10)
    with pytest.raises(ValueError):
        gaussian_comb(2.0, sieve_small, 0.0)


def test_gaussian_comb_unit_mass(sieve_small):
    primes = [float(p) for p in sieve_small.primes]
    total, _ = integrate.quad(lambda x: gaussian_comb(x, sieve_small, 0.1),
                              1.5, 100.5, points=primes, limit=400)
    assert total == pytest.approx(25.0, abs=1e-6)


def test_gaussian_comb_at_sieve_end(sieve_small):
    assert gaussian_comb(99.5, sieve_small, 0.1) == 0.0
    assert gaussian_comb(100.0, sieve_small, 1.0) == pytest.approx(
        math.exp(-4.5) / math.sqrt(2 * math.pi), rel=1e-12)
    assert gaussian_comb(97.0, sieve_small, 0.1) == pytest.approx(3.989, abs=1e-3)


def test_trace_formula_peaks_with_few_zeros(zeros_bundled):
    config = SmoothingConfig(gamma=0.3, zeros_used=30)
    xs = np.arange(2.5, 7.5, 0.01)
    g = g_semiclassical(xs, zeros_bundled, config)
    for p in (3, 5, 7):
        window = np.abs(xs - p) <= 0.5
        assert abs(xs[window][np.argmax(g[window])] - p) <= 0.1
    for x in (4.0, 6.0):
        assert abs(g_semiclassical(x, zeros_bundled, config)) < 0.2


def test_trace_formula_m_truncation(zeros_bundled):
    xs = np.linspace(2.0, 50.0, 400)
    full = g_semiclassical(xs, zeros_bundled, SmoothingConfig(m_max=14, zeros_used=30))
    short = g_semiclassical(xs, zeros_bundled, SmoothingConfig(m_max=5, zeros_used=30))
    np.testing.assert_array_equal(full, short)


def test_trace_formula_threads_independent(zeros_bundled):
    config = SmoothingConfig(zeros_used=30)
    xs = np.linspace(2.0, 30.0, 3000)
    single = g_semiclassical(xs, zeros_bundled, config, threads=1)
    multi = g_semiclassical(xs, zeros_bundled, config, threads=4)
    np.testing.assert_array_equal(single, multi)


def test_trace_formula_convolve_keeps_spike_at_two(zeros_bundled, sieve_small):
    config = SmoothingConfig(gamma=0.3, zeros_used=3000)
    g = g_semiclassical(2.0, zeros_bundled, config, method="convolve")
    assert g == pytest.approx(gaussian_comb(2.0, sieve_small, 0.3), rel=0.05)


def test_trace_formula_arguments(zeros_bundled):
    config = SmoothingConfig(zeros_used=30)
    assert isinstance(g_semiclassical(5.0, zeros_bundled, config), float)
    unsmoothed = g_semiclassical(5.0, zeros_bundled, config, smooth=False)
    assert np.isfinite(unsmoothed)
    with pytest.raises(ValueError):
        g_semiclassical(5.0, zeros_bundled, config, method="guess")
    with pytest.raises(ValueError):
        g_semiclassical(np.array([1.0, 5.0]), zeros_bundled, config)


@pytest.fixture(scope="module")
def density_grid():
    return np.arange(2.0, 50.0 + 1e-9, 0.01)


@pytest.mark.slow
@pytest.mark.parametrize("method", ["local", "convolve"])
def test_trace_formula_matches_comb(method, density_grid, zeros_bundled, sieve_small):
    config = SmoothingConfig(gamma=0.1, zeros_used=2000)
    g = g_semiclassical(density_grid, zeros_bundled, config, method=method, threads=4)
    comb = gaussian_comb(density_grid, sieve_small, 0.1)
    assert np.linalg.norm(g - comb) / np.linalg.norm(comb) < 0.05
    for p in sieve_small.primes[sieve_small.primes <= 47]:
        window = np.abs(density_grid - p) <= 0.3
        peak = density_grid[window][np.argmax(g[window])]
        assert abs(peak - p) <= 0.05


@pytest.mark.slow
@pytest.mark.parametrize("p", [23, 29, 37])
def test_trace_formula_peak_mass(p, zeros_bundled):
    config = SmoothingConfig(gamma=0.1, zeros_used=2000)
    mass, _ = integrate.quad(lambda x: g_semiclassical(x, zeros_bundled, config),
                             p - 0.5, p + 0.5, points=[p], limit=200)
    assert mass == pytest.approx(1.0, abs=0.1)


@pytest.mark.slow
def test_trace_formula_peak_grows_with_zeros(zeros_bundled):
    heights = [g_semiclassical(29.0, zeros_bundled,
                               SmoothingConfig(gamma=0.1, zeros_used=n))
               for n in (10, 100, 1000)]
    assert heights[0] < heights[1] < heights[2]
