"""
Shared fixtures: sieves and sopf tables of a few sizes, partition tables and
zeros tables.
"""
import pytest

from pyprimepart.exact import build_euler_dp, build_recursion
from pyprimepart.primes import build_sieve, build_sopf_table
from pyprimepart.riemann import load_zeros

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"


@pytest.fixture(scope="session")
def sieve_small():
    return build_sieve(100)


@pytest.fixture(scope="session")
def sieve_1e6():
    return build_sieve(10 ** 6)


@pytest.fixture(scope="session")
def sieve_2e4():
    return build_sieve(20_000)


@pytest.fixture(scope="session")
def sopf_2e4(sieve_2e4):
    return build_sopf_table(sieve_2e4)


@pytest.fixture(scope="session")
def table_dp_2000(sieve_2e4):
    return build_euler_dp(2000, sieve_2e4)


@pytest.fixture(scope="session")
def table_rec_2000(sopf_2e4):
    return build_recursion(2000, sopf_2e4)


@pytest.fixture(scope="session")
def table_dp_2e4(sieve_2e4):
    return build_euler_dp(20_000, sieve_2e4)


@pytest.fixture(scope="session")
def zeros_bundled():
    return load_zeros()

