"""
Command line interface of pyprimepart.

Every subcommand writes a CSV file (fixed column order, reals with 17
significant digits) and, where a figure belongs to it, a plot script next to
it::

    pyprimepart exact --n-max 20000 --checkpoint p.ckpt
    pyprimepart zofbeta --beta-min 0.005 --beta-max 0.5 --points 200
    pyprimepart asymptotic --n-grid log:1000:10000000:25
    pyprimepart compare --table p.ckpt
    pyprimepart prime-density --zeros-file zeros.txt --x-range 2:50

Exit codes: 0 success, 1 usage error, 2 computation error, 3 I/O error.
"""
import argparse
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

from .exact import (
    CheckpointError,
    build_euler_dp,
    build_recursion,
    checkpoint_load,
    export_csv,
    extend_table,
    log_count,
    log_counts,
    verify_tables,
)
from .figures import write_plot_script
from .primes import build_sieve, build_sopf_table
from .riemann import (
    SmoothingConfig,
    ZerosFileError,
    g_semiclassical,
    gaussian_comb,
    load_zeros,
)
from .saddle import beta0_lo, beta0_nlo, log_p_formula, solve_saddle
from .utils import (
    log_grid,
    parallel_map,
    parse_grid,
    parse_range,
    sign_change_idxs,
    write_csv,
)
from .zfunc import (
    F2_MODES,
    ZConstants,
    ln_z_asymptotic,
    ln_z_avg,
    ln_z_exact,
    required_sieve_limit,
)

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

SUBCOMMANDS = ("exact", "zofbeta", "asymptotic", "compare", "prime-density")
EXIT_OK, EXIT_USAGE, EXIT_COMPUTATION, EXIT_IO = 0, 1, 2, 3
EXACT_TOL = 1e-10


# ---- Parsing ----


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(
        prog="pyprimepart",
        description="Prime partitions: exact counts, partition function, "
                    "saddle-point asymptotics and the prime density from "
                    "Riemann zeros.")
    parser.add_argument(
        "--version", action="version", version=f"pyprimepart {__version__}")
    parser.add_argument(
        "-v", "--verbose", dest="loglevel", help="set loglevel to INFO",
        action="store_const", const=logging.INFO)
    parser.add_argument(
        "-vv", "--very-verbose", dest="loglevel", help="set loglevel to DEBUG",
        action="store_const", const=logging.DEBUG)
    parser.add_argument(
        "--output-dir", default=".", help="directory for all outputs")
    parser.add_argument(
        "--threads", type=int, default=1,
        help="worker threads; outputs do not depend on it")
    parser.add_argument(
        "--config", help="key = value file with defaults for the flags")

    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND",
                                parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("exact", help="exact table of P(n)")
    p.add_argument("--n-max", type=int, help="largest n")
    p.add_argument("--checkpoint", help="checkpoint file to write")
    p.add_argument("--resume", action="store_true",
                   help="continue from --checkpoint if it exists")
    p.add_argument("--export", help="CSV path (default: partitions.csv)")
    p.add_argument("--full-values", action="store_true",
                   help="include the decimal value of P(n) in the CSV")
    p.add_argument("--algorithm", choices=("auto", "euler_dp", "recursion"),
                   default="auto",
                   help="auto builds both and cross-checks up to "
                        "--cross-check-threshold, euler_dp alone above")
    p.add_argument("--cross-check-threshold", type=int, default=10_000)
    p.add_argument("--checkpoint-every", type=int, default=10_000)

    p = sub.add_parser("zofbeta", help="ln Z(beta) by three methods")
    p.add_argument("--beta-min", type=float, default=0.005)
    p.add_argument("--beta-max", type=float, default=0.5)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--sieve-limit", type=int,
                   help="default: large enough for --beta-min")
    p.add_argument("--lower-limit", type=float, default=0.0,
                   help="lower limit a of the average-density integral")

    p = sub.add_parser("asymptotic", help="closed forms and saddle points")
    p.add_argument("--n-grid", default="log:1000:10000000:25")
    p.add_argument("--f2-mode", choices=F2_MODES, default="converged")
    p.add_argument("--k-max", type=int, default=10_000)

    p = sub.add_parser("compare", help="closed forms against exact counts")
    p.add_argument("--table", help="checkpoint with the exact table")
    p.add_argument("--n-max", type=int,
                   help="build the exact table instead of loading it")
    p.add_argument("--grid", help="n grid (default: every n from 1000)")
    p.add_argument("--f2-mode", choices=F2_MODES, default="converged")
    p.add_argument("--k-max", type=int, default=10_000)

    p = sub.add_parser("prime-density", help="trace formula for the primes")
    p.add_argument("--zeros-file", help="default: bundled first 3000 zeros")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--m-max", type=int, default=14)
    p.add_argument("--zeros-used", type=int, default=3000)
    p.add_argument("--x-range", default="2:50")
    p.add_argument("--dx", type=float, default=0.01)
    p.add_argument("--method", choices=("local", "convolve"), default="local")
    return parser


def _read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (t.strip() for t in text.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def _apply_config(parser, values):
    """Use config file values as defaults, so flags on the command line win."""
    subparsers = next(a for a in parser._actions
                      if isinstance(a, argparse._SubParsersAction))
    known = set()
    for p in [parser, *subparsers.choices.values()]:
        defaults = {}
        for action in p._actions:
            if action.dest in values:
                value = values[action.dest]
                if isinstance(action, argparse._StoreTrueAction):
                    value = value.lower() in ("1", "true", "yes", "on")
                defaults[action.dest] = value
                known.add(action.dest)
        p.set_defaults(**defaults)
    unknown = set(values) - known
    if unknown:
        parser.error(f"unknown keys in config file: {', '.join(sorted(unknown))}")


def parse_args(args):
    """
    Parse command line parameters.

    Args:
      args (List[str]): command line parameters as list of strings

    Returns:
      :obj:`argparse.Namespace`: command line parameters namespace
    """
    parser = _build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(args)
    if known.config:
        try:
            _apply_config(parser, _read_config_file(known.config))
        except (OSError, ValueError) as err:
            parser.error(f"config file: {err}")
    ns = parser.parse_args(args)
    try:
        ns.run_config = RunConfig.from_namespace(ns)
    except ValueError as err:
        parser.error(str(err))
    return ns


def setup_logging(loglevel):
    """
    Setup basic logging.

    Args:
      loglevel (int): minimum loglevel for emitting messages
    """
    logformat = "[%(asctime)s] %(levelname)s:%(name)s:%(message)s"
    logging.basicConfig(
        level=loglevel, stream=sys.stdout, format=logformat,
        datefmt="%Y-%m-%d %H:%M:%S")


# ---- Configuration ----


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one command line run."""

    subcommand: str
    output_dir: Path = Path(".")
    threads: int = 1
    # exact / compare
    n_max: int = None
    checkpoint: Path = None
    resume: bool = False
    export: Path = None
    full_values: bool = False
    algorithm: str = "auto"
    cross_check_threshold: int = 10_000
    checkpoint_every: int = 10_000
    table: Path = None
    grid: np.ndarray = field(default=None, compare=False)
    # zofbeta
    beta_min: float = 0.005
    beta_max: float = 0.5
    points: int = 200
    sieve_limit: int = None
    lower_limit: float = 0.0
    # asymptotic
    n_grid: np.ndarray = field(default=None, compare=False)
    f2_mode: str = "converged"
    k_max: int = 10_000
    # prime-density
    zeros_file: Path = None
    gamma: float = 0.1
    m_max: int = 14
    zeros_used: int = 3000
    x_range: tuple = (2.0, 50.0)
    dx: float = 0.01
    method: str = "local"

    @classmethod
    def from_namespace(cls, ns):
        """Collect and validate the flags relevant to ``ns.subcommand``."""
        names = {f.name for f in fields(cls)}
        kw = {k: v for k, v in vars(ns).items() if k in names and v is not None}
        for key in ("output_dir", "checkpoint", "export", "table", "zeros_file"):
            if key in kw:
                kw[key] = Path(kw[key])
        for key in ("grid", "n_grid"):
            if key in kw:
                kw[key] = parse_grid(kw[key])
        if "x_range" in kw:
            kw["x_range"] = parse_range(kw["x_range"])
        config = cls(**kw)
        config.validate()
        return config

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        if self.threads < 1:
            raise ValueError("--threads must be >= 1")
        check = getattr(self, "_validate_" + self.subcommand.replace("-", "_"))
        check()

    def _validate_exact(self):
        if self.n_max is None:
            raise ValueError("exact: --n-max is required")
        if self.n_max < 0:
            raise ValueError("exact: --n-max must be >= 0")
        if self.resume and self.checkpoint is None:
            raise ValueError("exact: --resume needs --checkpoint")
        if self.checkpoint_every < 1:
            raise ValueError("exact: --checkpoint-every must be >= 1")
        if self.algorithm == "recursion" and self.n_max > 10 ** 6:
            raise ValueError("exact: the recursion is quadratic; use euler_dp")

    def _validate_zofbeta(self):
        if not 0 < self.beta_min < self.beta_max < 1:
            raise ValueError(
                "zofbeta: need 0 < --beta-min < --beta-max < 1")
        if self.points < 2:
            raise ValueError("zofbeta: --points must be >= 2")
        if self.lower_limit == 1 or not 0 <= self.lower_limit <= 2:
            raise ValueError("zofbeta: --lower-limit must be in [0,1) or (1,2]")
        if self.sieve_limit is not None and self.sieve_limit < 2:
            raise ValueError("zofbeta: --sieve-limit must be >= 2")

    def _validate_asymptotic(self):
        if self.n_grid is None or self.n_grid[0] < 3:
            raise ValueError("asymptotic: --n-grid entries must be >= 3")
        if self.k_max < 2:
            raise ValueError("asymptotic: --k-max must be >= 2")

    def _validate_compare(self):
        if (self.table is None) == (self.n_max is None):
            raise ValueError("compare: give exactly one of --table or --n-max")
        if self.grid is not None and self.grid[0] < 3:
            raise ValueError("compare: --grid entries must be >= 3")
        if self.k_max < 2:
            raise ValueError("compare: --k-max must be >= 2")

    def _validate_prime_density(self):
        lo, hi = self.x_range
        if lo <= 1:
            raise ValueError("prime-density: --x-range must start above 1")
        if not self.dx > 0 or self.dx > hi - lo:
            raise ValueError("prime-density: --dx must lie in (0, width]")
        SmoothingConfig(self.gamma, self.m_max, self.zeros_used)

    def constants(self):
        return ZConstants.from_mode(self.f2_mode, self.k_max)


# ---- Subcommands ----


def run_exact(config):
    """Build (or resume) the exact table, checkpoint it and export a CSV."""
    n_max = config.n_max
    checkpoint = config.checkpoint
    sieve = build_sieve(max(n_max, 2))
    sopf = build_sopf_table(sieve)
    algorithm = config.algorithm
    if algorithm == "auto":
        algorithm = ("both" if n_max <= config.cross_check_threshold
                     else "euler_dp")
    every = config.checkpoint_every

    if config.resume and checkpoint.exists():
        loaded = checkpoint_load(checkpoint)
        table = extend_table(loaded, n_max, sopf, checkpoint, every)
    elif algorithm == "recursion":
        table = build_recursion(n_max, sopf, checkpoint, every)
    else:
        table = build_euler_dp(n_max, sieve, checkpoint, every)

    if algorithm == "both":
        other = (build_recursion(n_max, sopf) if table.algorithm_tag == "euler_dp"
                 else build_euler_dp(n_max, sieve))
        mismatch = verify_tables(table, other, threads=config.threads)
        if mismatch is not None:
            raise ArithmeticError(
                f"exact: algorithms disagree first at n={mismatch}")
        _logger.info("both algorithms agree up to n=%d", n_max)

    export = config.export or config.output_dir / "partitions.csv"
    export_csv(table, export, full=config.full_values, threads=config.threads)
    return table


def run_zofbeta(config):
    """CSV of ln Z over a log-spaced β grid, with plot script."""
    betas = log_grid(config.beta_min, config.beta_max, config.points)
    limit = config.sieve_limit or required_sieve_limit(config.beta_min, EXACT_TOL)
    sieve = build_sieve(limit)
    constants = ZConstants.from_mode()

    def row(beta):
        return (beta, ln_z_exact(beta, sieve, EXACT_TOL),
                ln_z_avg(config.lower_limit, beta),
                ln_z_asymptotic(beta, constants))

    rows = parallel_map(row, betas, config.threads)
    frame = pd.DataFrame(
        rows, columns=["beta", "ln_z_exact", "ln_z_avg", "ln_z_asymptotic"])
    path = config.output_dir / "zofbeta.csv"
    write_csv(frame, path)
    write_plot_script("zofbeta", path)
    return frame


def run_asymptotic(config):
    """CSV of the closed forms and saddle points over an n grid."""
    constants = config.constants()
    n = config.n_grid.astype(float)
    numeric = parallel_map(lambda e: solve_saddle(e, constants).beta0, n,
                           config.threads)
    frame = pd.DataFrame({
        "n": config.n_grid,
        "lnP_lo": log_p_formula(n, "lo", constants),
        "lnP_vaughan": log_p_formula(n, "vaughan", constants),
        "lnP_main": log_p_formula(n, "main", constants),
        "beta0_lo": beta0_lo(n),
        "beta0_nlo": beta0_nlo(n, constants),
        "beta0_numeric": numeric,
    })
    path = config.output_dir / "asymptotic.csv"
    write_csv(frame, path)
    write_plot_script("asymptotic", path)
    return frame


@dataclass(frozen=True)
class ComparisonRow:
    """
    One n of the comparison; relative errors are divided by ln P₀(n), the
    ``lo`` closed form.
    """

    n: int
    ln_p_exact: float
    ln_p_lo: float
    ln_p_vaughan: float
    ln_p_main: float
    rel_err_lo: float
    rel_err_vaughan: float
    rel_err_main: float


COMPARE_VARIANTS = ("lo", "vaughan", "main")


def comparison_frame(table, grid, constants, threads=1):
    """Rows of :class:`ComparisonRow` as a DataFrame over ``grid``."""
    grid = np.asarray(grid, dtype=np.int64)
    if grid[-1] > table.n_max:
        raise ValueError(
            f"compare: grid reaches n={grid[-1]}, table ends at {table.n_max}")
    exact = log_counts(table, threads=threads)[grid]
    n = grid.astype(float)
    data = {"n": grid, "ln_p_exact": exact}
    for variant in COMPARE_VARIANTS:
        data[f"ln_p_{variant}"] = log_p_formula(n, variant, constants)
    for variant in COMPARE_VARIANTS:
        data[f"rel_err_{variant}"] = (
            (data[f"ln_p_{variant}"] - exact) / data["ln_p_lo"])
    return pd.DataFrame(data, columns=[f.name for f in fields(ComparisonRow)])


def _rel_err(table, n, variant, constants):
    approx = log_p_formula(float(n), variant, constants)
    lo = log_p_formula(float(n), "lo", constants)
    return (approx - log_count(table, n)) / lo


def find_crossings(table, frame, variant, constants):
    """
    Every n where the relative error of ``variant`` changes sign, refined
    by bisection between grid neighbours so that the sign at n differs from
    the sign at n-1.
    """
    grid = frame["n"].to_numpy()
    err = frame[f"rel_err_{variant}"].to_numpy()
    crossings = []
    for i in sign_change_idxs(err):
        lo, hi = int(grid[i - 1]), int(grid[i])
        positive_lo = err[i - 1] > 0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if (_rel_err(table, mid, variant, constants) > 0) == positive_lo:
                lo = mid
            else:
                hi = mid
        crossings.append(hi)
    return crossings


def run_compare(config):
    """Comparison CSV and crossing report for the three closed forms."""
    constants = config.constants()
    if config.table is not None:
        table = checkpoint_load(config.table)
    else:
        table = build_euler_dp(config.n_max, build_sieve(max(config.n_max, 2)))
    grid = config.grid
    if grid is None:
        if table.n_max < 1000:
            raise ValueError(
                f"compare: table ends at {table.n_max}; pass --grid")
        grid = np.arange(1000, table.n_max + 1)

    frame = comparison_frame(table, grid, constants, threads=config.threads)
    path = config.output_dir / "compare.csv"
    write_csv(frame, path)
    write_plot_script("compare", path)

    lines = []
    crossings = {}
    for variant in COMPARE_VARIANTS:
        found = find_crossings(table, frame, variant, constants)
        crossings[variant] = found
        if found:
            line = (f"{variant}: first sign change at n={found[0]}"
                    f" (all: {', '.join(str(c) for c in found)})")
        else:
            sign = "positive" if frame[f"rel_err_{variant}"].iloc[0] > 0 else "negative"
            line = f"{variant}: no sign change, {sign} over the grid"
        _logger.info(line)
        lines.append(line)
    (config.output_dir / "compare_crossings.txt").write_text(
        "\n".join(lines) + "\n", encoding="utf-8")
    return frame, crossings


def run_prime_density(config):
    """CSV of the smoothed trace formula and the Gaussian comb."""
    zeros = load_zeros(config.zeros_file)
    smoothing = SmoothingConfig(config.gamma, config.m_max, config.zeros_used)
    lo, hi = config.x_range
    x = lo + config.dx * np.arange(int(round((hi - lo) / config.dx)) + 1)
    sieve = build_sieve(int(math.ceil(hi + 8 * config.gamma)) + 1)
    frame = pd.DataFrame({
        "x": x,
        "g_semiclassical_smoothed": g_semiclassical(
            x, zeros, smoothing, smooth=True, method=config.method,
            threads=config.threads),
        "gaussian_comb": gaussian_comb(x, sieve, config.gamma),
    })
    path = config.output_dir / "prime_density.csv"
    write_csv(frame, path)
    write_plot_script("prime-density", path)
    return frame


RUNNERS = {
    "exact": run_exact,
    "zofbeta": run_zofbeta,
    "asymptotic": run_asymptotic,
    "compare": run_compare,
    "prime-density": run_prime_density,
}


def main(args):
    """
    Wrapper allowing the subcommands to be called with string arguments in
    a CLI fashion.

    Returns
    -------
    exit_code : int
    """
    args = parse_args(args)
    setup_logging(args.loglevel or logging.WARNING)
    config = args.run_config
    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        RUNNERS[config.subcommand](config)
    except (OSError, CheckpointError, ZerosFileError) as err:
        _logger.error("%s", err)
        return EXIT_IO
    except (ArithmeticError, RuntimeError, ValueError, MemoryError) as err:
        _logger.error("%s", err)
        return EXIT_COMPUTATION
    _logger.info("%s done", config.subcommand)
    return EXIT_OK


def run():
    """Calls :func:`main` passing the CLI arguments extracted from :obj:`sys.argv`."""
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
