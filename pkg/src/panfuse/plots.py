"""Matplotlib figure rendering for the CLI report paths."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_convergence_figure(history, path):
    """Objective and primal residual versus iteration, on twin log axes."""
    iters = [h["iteration"] for h in history]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(iters, [h["objective"] for h in history], lw=1.2)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("objective")
    axes[0].set_title("objective")
    resid = np.array([h["primal_residual"] for h in history])
    axes[1].semilogy(iters, np.maximum(resid, 1e-300), lw=1.2)
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("relative primal residual")
    axes[1].set_title("primal residual")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_metrics_figure(report_dict, path):
    """Horizontal bar chart of the available metric values."""
    items = [(k, v) for k, v in report_dict.items() if v is not None and not k.endswith("_x100")]
    fig, ax = plt.subplots(figsize=(6, 0.6 * max(len(items), 2) + 1))
    if items:
        names = [k for k, _ in items]
        values = [v for _, v in items]
        ax.barh(names, values, color="steelblue")
        for i, v in enumerate(values):
            ax.text(v, i, f" {v:.4g}", va="center", fontsize=9)
    ax.set_title("quality metrics")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_preview_figure(cube, pan, path, band=None):
    """Side-by-side grayscale preview of one band and the panchromatic image."""
    band = cube.bands // 2 if band is None else band
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
    axes[0].imshow(cube.data[band], cmap="gray")
    axes[0].set_title(f"band {band + 1} / {cube.bands}")
    axes[1].imshow(pan.data, cmap="gray")
    axes[1].set_title("panchromatic")
    for ax in axes:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
