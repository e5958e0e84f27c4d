"""Figure rendering for the report commands.

Everything draws to files through the Agg backend, so plots work headless.
Each function takes the already-computed table rows or density sample; no
numerics happen here.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .quadrature import DensitySample
from .reports import AsymmetryRow, ComparisonRow

__all__ = ["plot_density", "plot_comparison", "plot_asymmetry"]

_DPI = 150


def plot_density(sample: DensitySample, path: str) -> None:
    """F and H on the sample grid, one panel each (their scales differ)."""
    fig, (ax_f, ax_h) = plt.subplots(1, 2, figsize=(9.6, 4.0))
    ax_f.plot(sample.tau, sample.F, lw=1.2)
    ax_f.set_xlabel(r"$\tau$")
    ax_f.set_ylabel(r"$F_{%d}(\tau)$" % sample.g)
    ax_f.set_title(f"symmetric trace density, g={sample.g}")
    ax_h.plot(sample.tau, sample.H, lw=1.2, color="tab:red")
    ax_h.axhline(0.0, color="0.7", lw=0.6)
    ax_h.set_xlabel(r"$\tau$")
    ax_h.set_ylabel(r"$H_{%d}(\tau)$" % sample.g)
    ax_h.set_title("odd refinement term")
    for ax in (ax_f, ax_h):
        ax.grid(alpha=0.25)
    if sample.lower_precision:
        ax_f.annotate("Monte Carlo (lower precision)", xy=(0.02, 0.95),
                      xycoords="axes fraction", fontsize=8, color="0.4")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_comparison(rows: list[ComparisonRow], path: str) -> None:
    """Observed rescaled trace weights against F and the refined prediction."""
    taus = np.array([r.tau for r in rows])
    obs = np.array([r.observed for r in rows])
    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    ax.plot(taus, obs, "o", ms=3, label="census", zorder=3)
    ax.plot(taus, [r.predicted_F for r in rows], lw=1.0, color="0.5", label=r"$F$")
    ax.plot(taus, [r.predicted_refined for r in rows], lw=1.0, color="tab:red",
            label=r"$F - H/\sqrt{q}$")
    ax.set_xlabel(r"$\tau = t/\sqrt{q}$")
    ax.set_ylabel("density")
    ax.grid(alpha=0.25)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_asymmetry(rows: list[AsymmetryRow], path: str) -> None:
    """Signed census differences against -2H and the closed-form references."""
    taus = np.array([r.tau for r in rows])
    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    ax.plot(taus, [r.observed_diff for r in rows], "o", ms=3, label="census difference")
    ax.plot(taus, [r.predicted for r in rows], lw=1.2, color="tab:red", label=r"$-2H$")
    ax.plot(taus, [-r.nu_lim for r in rows], lw=0.9, ls="--", color="tab:green",
            label=r"$-\nu^{\lim}$")
    ax.plot(taus, [-r.vlim for r in rows], lw=0.9, ls=":", color="tab:purple",
            label=r"$-\mathcal{V}^{\lim}$")
    ax.axhline(0.0, color="0.7", lw=0.6)
    ax.set_xlabel(r"$\tau = t/\sqrt{q}$")
    ax.set_ylabel("signed difference")
    ax.grid(alpha=0.25)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
