from importlib.metadata import PackageNotFoundError, version  # pragma: no cover

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = __name__
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

from pyprimepart.primes import build_sieve, build_sopf_table, moebius, sopf
from pyprimepart.exact import (
    build_euler_dp,
    build_recursion,
    checkpoint_load,
    checkpoint_save,
    log_count,
)
from pyprimepart.zfunc import (
    ZConstants,
    compute_f2,
    ln_z_asymptotic,
    ln_z_avg,
    ln_z_exact,
)
from pyprimepart.saddle import log_p_formula, rho_saddle, solve_saddle
from pyprimepart.riemann import g_semiclassical, gaussian_comb, load_zeros
