"""Report figures rendered beside the delimited output.

Matplotlib is imported lazily with the Agg backend so headless runs and
figure-free commands never touch a display.
"""

from __future__ import annotations

import numpy as np


def _axes():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    return plt, fig, ax


def _save(plt, fig, outpath: str):
    fig.tight_layout()
    fig.savefig(outpath, dpi=150, metadata={"Software": None} if outpath.endswith(".png") else None)
    plt.close(fig)


def density_figure(density, outpath: str, exact=None, title: str = "spectral density"):
    """Semiclassical density vs energy, with the exact smoothed density
    overlaid when available."""
    plt, fig, ax = _axes()
    ax.plot(density.energies, density.values, lw=1.2, label="semiclassical")
    if exact is not None:
        ax.plot(exact.energies, exact.values, lw=0.9, ls="--", label="exact smoothed")
    ax.set_xlabel("E")
    ax.set_ylabel(r"$\rho(E)$")
    ax.set_title(title)
    ax.legend(frameon=False)
    _save(plt, fig, outpath)
    return outpath


def weyl_figure(energies, values, outpath: str, title: str = "mean level density"):
    plt, fig, ax = _axes()
    ax.plot(energies, values, lw=1.2)
    ax.set_xlabel("E")
    ax.set_ylabel(r"$d\bar N/dE$")
    ax.set_title(title)
    _save(plt, fig, outpath)
    return outpath


def heat_trace_figure(ts, lhs_vals, rhs_vals, outpath: str,
                      title: str = "heat-trace identity"):
    plt, fig, ax = _axes()
    ax.plot(ts, lhs_vals, "o-", ms=3, lw=1.0, label="spectral side")
    ax.plot(ts, rhs_vals, "s--", ms=3, lw=1.0, label="geometric side")
    ax.set_xlabel("t")
    ax.set_ylabel("trace")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend(frameon=False)
    _save(plt, fig, outpath)
    return outpath
