"""Matplotlib renderings saved next to the delimited outputs.

These mirror the data-attributed SVGs as conventional raster figures for
human consumption; tests assert against the SVGs/CSVs, not these files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update({
    "figure.figsize": (8, 5),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 11,
})


def render_loss_curve(rows: list[dict], path) -> None:
    fig, ax = plt.subplots()
    epochs = [int(r["epoch"]) for r in rows]
    ax.plot(epochs, [float(r["total"]) for r in rows], "-o", ms=2.5, label="total")
    ax.plot(epochs, [float(r["kl"]) for r in rows], "--", lw=1, label="KL")
    ax2 = ax.twinx()
    ax2.plot(epochs, [float(r["beta"]) for r in rows], color="gray", lw=1, label="beta")
    ax2.set_ylabel("beta", color="gray")
    ax2.grid(False)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title("Training loss")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_metric_bars(metrics: dict[str, float | None], path) -> None:
    fig, ax = plt.subplots()
    names = list(metrics)
    values = [metrics[n] if metrics[n] is not None else 0.0 for n in names]
    bars = ax.bar(names, values, color="#ff7f0e")
    for bar, name in zip(bars, names):
        if metrics[name] is None:
            bar.set_hatch("//")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("fraction")
    ax.set_title("Generation metrics")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_projection(points: list[dict], path) -> None:
    fig, ax = plt.subplots()
    for series, marker, color in (("training", "o", "#1f77b4"), ("generated", "s", "#ff7f0e")):
        xs = [float(p["x"]) for p in points if p.get("series") == series]
        ys = [float(p["y"]) for p in points if p.get("series") == series]
        if xs:
            ax.scatter(xs, ys, marker=marker, s=22, c=color, label=series, alpha=0.8)
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    ax.set_title("Chemical space projection")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_heatmap(compounds: list[str], ligases: list[str], scores: dict, path) -> None:
    grid = np.full((len(compounds), len(ligases)), np.nan)
    for i, comp in enumerate(compounds):
        for j, lig in enumerate(ligases):
            if (comp, lig) in scores:
                grid[i, j] = scores[(comp, lig)]
    fig, ax = plt.subplots(figsize=(6, max(3, 0.3 * len(compounds) + 1.5)))
    masked = np.ma.masked_invalid(grid)
    im = ax.imshow(masked, cmap="Blues_r", aspect="auto")
    ax.set_xticks(range(len(ligases)), ligases)
    ax.set_yticks(range(len(compounds)), compounds, fontsize=7)
    ax.grid(False)
    fig.colorbar(im, ax=ax, label="docking score (kcal/mol)")
    ax.set_title("Cross-target docking scores")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
