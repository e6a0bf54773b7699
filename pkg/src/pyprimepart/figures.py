"""
Plot scripts written next to the CSV files of the command line tool.

Each script is self-contained: it reads only the CSV it was written for and
needs pandas and matplotlib (the ``plots`` extra). Nothing is plotted by the
package itself.
"""
import logging
from pathlib import Path

from pyprimepart import __version__

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

_logger = logging.getLogger(__name__)

_HEADER = '''\
"""Plot {csv_name}. Generated by pyprimepart {version}."""
import argparse
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

HERE = Path(__file__).parent


def get_args():
    parser = argparse.ArgumentParser(description="Plot {csv_name}.")
    parser.add_argument("--show", action="store_true")
    return parser.parse_args()

'''

_FOOTER = '''

if __name__ == "__main__":
    args = get_args()
    data = pd.read_csv(HERE / "{csv_name}")
    plot(data)
    if args.show:
        plt.show()
'''

_BODIES = {
    "zofbeta": '''
def plot(data):
    for name, mask in (("zofbeta", data["beta"] > 0),
                       ("zofbeta_small", data["beta"] <= 0.02)):
        sub = data[mask]
        fig, ax = plt.subplots()
        ax.plot(sub["beta"], sub["ln_z_exact"], "r-", label="exact")
        ax.plot(sub["beta"], sub["ln_z_avg"], "g:", label="average density (a=0)")
        ax.plot(sub["beta"], sub["ln_z_asymptotic"], "b-.", label="asymptotic")
        ax.set_xlabel("beta")
        ax.set_ylabel("ln Z(beta)")
        ax.set_yscale("log")
        ax.legend()
        fig.savefig(HERE / (name + ".png"), dpi=150)
''',
    "asymptotic": '''
def plot(data):
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)
    for col, style in (("lnP_lo", "b-."), ("lnP_vaughan", "m--"),
                       ("lnP_main", "g-")):
        ax1.plot(data["n"], data[col], style, label=col)
    ax1.set_ylabel("ln P(n)")
    ax1.legend()
    for col, style in (("beta0_lo", "b-."), ("beta0_nlo", "g-"),
                       ("beta0_numeric", "k:")):
        ax2.plot(data["n"], data[col], style, label=col)
    ax2.set_xscale("log")
    ax2.set_yscale("log")
    ax2.set_xlabel("n")
    ax2.set_ylabel("beta0")
    ax2.legend()
    fig.savefig(HERE / "asymptotic.png", dpi=150)
''',
    "compare": '''
def plot(data):
    fig, ax = plt.subplots()
    inv_n = 1.0 / data["n"]
    for col, style in (("rel_err_lo", "b-."), ("rel_err_vaughan", "m--"),
                       ("rel_err_main", "g-")):
        ax.plot(inv_n, data[col], style, label=col)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("1/n")
    ax.set_ylabel("(ln P_approx - ln P) / ln P_0")
    ax.legend()
    fig.savefig(HERE / "compare.png", dpi=150)
''',
    "prime-density": '''
def plot(data):
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(data["x"], data["gaussian_comb"], "r-", lw=2,
            label="Gaussians at the primes")
    ax.plot(data["x"], data["g_semiclassical_smoothed"], "b--",
            label="trace formula")
    ax.set_xlabel("x")
    ax.set_ylabel("g(x)")
    ax.legend()
    fig.savefig(HERE / "prime_density.png", dpi=150)
''',
}

KINDS = tuple(_BODIES)


def plot_script(kind, csv_name):
    """Source text of the plot script for a subcommand's CSV."""
    if kind not in _BODIES:
        raise ValueError(f"figures: no plot script for {kind!r}")
    return (_HEADER.format(csv_name=csv_name, version=__version__)
            + _BODIES[kind] + _FOOTER.format(csv_name=csv_name))


def write_plot_script(kind, csv_path):
    """
    Write ``plot_<csv stem>.py`` next to ``csv_path`` and return its path.
    """
    csv_path = Path(csv_path)
    script = csv_path.with_name(f"plot_{csv_path.stem}.py")
    script.write_text(plot_script(kind, csv_path.name), encoding="utf-8")
    _logger.info("wrote plot script %s", script)
    return script
