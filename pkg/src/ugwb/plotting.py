"""Figure rendering for the command-line reports.

Each helper writes one PNG next to the delimited output of a command. Keep
these free of numerics: everything plotted here is computed elsewhere and
passed in ready to draw.
"""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = [
    "save_spectrum_plot",
    "save_validate_plot",
    "save_levels_plot",
    "save_decay_plot",
    "save_marker_plot",
    "save_trace_plot",
]

_DPI = 130


def save_spectrum_plot(path, ks, lams, lower=None, upper=None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(ks, lams, "o-", ms=4, label="lambda")
    if lower is not None and upper is not None and np.all(np.isfinite(lower)):
        ax.fill_between(ks, lower, upper, alpha=0.2, label="bracket")
    ax.set_xlabel("angular index k")
    ax.set_ylabel("eigenvalue")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_validate_plot(path, rel_errors, loc_integrals, m_bound):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.semilogy(np.arange(len(rel_errors)), np.maximum(rel_errors, 1e-18), "s-", ms=4)
    ax1.set_xlabel("level index")
    ax1.set_ylabel("grid vs radial rel. error")
    ax2.plot(np.arange(len(loc_integrals)), loc_integrals, "o", ms=4, label="loc integral")
    ax2.axhline(m_bound, color="k", ls="--", lw=1, label="M bound")
    ax2.set_xlabel("level index")
    ax2.set_yscale("log")
    ax2.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_levels_plot(path, lams, radii):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.semilogy(np.arange(len(lams)), np.maximum(lams, 1e-300), "o", ms=3)
    ax1.set_xlabel("level index")
    ax1.set_ylabel("eigenvalue")
    ax2.plot(np.arange(len(radii)), radii, "o", ms=3)
    ax2.set_xlabel("level index")
    ax2.set_ylabel("concentration radius")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_decay_plot(path, distances, log_max, c, beta, r_squared):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(distances, log_max, "o", ms=5, label="bin max")
    if np.isfinite(beta):
        d = np.linspace(min(distances), max(distances), 64)
        ax.plot(d, np.log(c) - beta * d, "-", lw=1.5, label=f"fit beta={beta:.3f} r2={r_squared:.3f}")
    ax.set_xlabel("distance")
    ax.set_ylabel("log max |K|")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_marker_plot(path, field):
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    vmax = max(float(np.abs(field).max()), 1e-12)
    im = ax.imshow(field.T, origin="lower", cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    fig.colorbar(im, ax=ax, label="marker")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_trace_plot(path, ls, values, limit=None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ls, values, "o-", ms=5, label="trace / volume")
    if limit is not None:
        ax.axhline(limit, color="k", ls="--", lw=1, label=f"extrapolated {limit:.4g}")
    ax.set_xlabel("box half-width L")
    ax.set_ylabel("value")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
