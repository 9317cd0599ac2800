"""Headless matplotlib rendering for the command-line reports.

Each helper writes one PNG next to the delimited output and returns the
path.  The Agg backend is forced so the commands work without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_loss_curve",
    "save_pickands_curves",
    "save_pickands_scatter",
    "save_survival_calibration",
    "save_sample_scatter",
    "save_benchmark_curves",
]

_DPI = 150


def save_loss_curve(epoch_loss, path, title="training loss"):
    """Per-epoch loss on a log-scale y axis."""
    loss = np.asarray(epoch_loss, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(1, loss.size + 1), loss, lw=1.0)
    if loss.size and np.all(loss > 0):
        ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_pickands_curves(w1, curves, path, title="Pickands function"):
    """Bivariate dependence-function curves over the first weight.

    ``curves`` maps a label to values on the ``w1`` grid.  The admissible
    envelope max(w, 1-w) <= A <= 1 is drawn for reference.
    """
    w1 = np.asarray(w1, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(w1, np.maximum(w1, 1.0 - w1), "k--", lw=0.8, label="bounds")
    ax.plot(w1, np.ones_like(w1), "k--", lw=0.8)
    for label, vals in curves.items():
        ax.plot(w1, np.asarray(vals, dtype=float), lw=1.2, label=label)
    ax.set_xlabel("w")
    ax.set_ylabel("A(w, 1-w)")
    ax.set_ylim(0.45, 1.05)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_pickands_scatter(w_max, columns, path, title="Pickands estimates"):
    """Estimates at random simplex points against the lower bound max(w).

    Used when d > 2, where no single curve exists; points on the diagonal
    indicate complete dependence, points near 1 independence.
    """
    w_max = np.asarray(w_max, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    lo = np.linspace(w_max.min(), 1.0, 50)
    ax.plot(lo, lo, "k--", lw=0.8, label="max w")
    ax.plot(lo, np.ones_like(lo), "k--", lw=0.8)
    for label, vals in columns.items():
        ax.plot(w_max, np.asarray(vals, dtype=float), ".", ms=3, label=label)
    ax.set_xlabel("max w")
    ax.set_ylabel("A(w)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_survival_calibration(empirical, columns, path, title="joint survival"):
    """Model survival probabilities against empirical exceedance rates."""
    emp = np.asarray(empirical, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 5))
    top = max(1e-12, emp.max(initial=0.0))
    for label, vals in columns.items():
        vals = np.asarray(vals, dtype=float)
        top = max(top, vals.max(initial=0.0))
        ax.plot(emp, vals, ".", ms=4, label=label)
    lim = np.array([0.0, 1.05 * top])
    ax.plot(lim, lim, "k--", lw=0.8)
    ax.set_xlabel("empirical exceedance rate")
    ax.set_ylabel("estimated survival probability")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_sample_scatter(samples, path, title="samples"):
    """First two coordinates of sampled vectors on log-log axes."""
    x = np.asarray(samples, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(x[:, 0], x[:, 1], ".", ms=2, alpha=0.5)
    if np.all(x[:, :2] > 0):
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("coordinate 1")
    ax.set_ylabel("coordinate 2")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_benchmark_curves(x, series, path, xlabel, title="benchmark"):
    """Mean curves with +-1 stddev bands, log-scale MSE axis."""
    x = np.asarray(x, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, (mean, std) in series.items():
        mean = np.asarray(mean, dtype=float)
        std = np.asarray(std, dtype=float)
        (line,) = ax.plot(x, mean, "-o", ms=3, lw=1.2, label=label)
        ax.fill_between(x, mean - std, mean + std, alpha=0.15, color=line.get_color())
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("MSE")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
