"""Figure rendering for the report paths (PNG files next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "effects_chart",
    "pareto_chart",
    "convergence_chart",
    "desirability_chart",
]

_DPI = 150


def effects_chart(effects, margin: float, path, title="Standardized effects"):
    """Horizontal Pareto chart of |effect| with the significance margin line."""
    order = np.argsort([abs(e.estimate) for e in effects])
    names = [effects[i].name for i in order]
    values = [abs(effects[i].estimate) for i in order]
    colors = ["tab:red" if effects[i].significant else "tab:gray" for i in order]
    fig, ax = plt.subplots(figsize=(7, 0.4 * len(names) + 1.5))
    ax.barh(names, values, color=colors)
    if margin > 0:
        ax.axvline(margin, color="k", linestyle="--", linewidth=1, label=f"margin {margin:.3g}")
        ax.legend(loc="lower right")
    ax.set_xlabel("|effect|")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def pareto_chart(
    objectives,
    front_mask=None,
    thresholds=None,
    names=("objective 1", "objective 2"),
    path="pareto.png",
    title="Trade-off",
):
    """Scatter of two objectives with the non-dominated set highlighted."""
    F = np.atleast_2d(np.asarray(objectives, dtype=float))
    fig, ax = plt.subplots(figsize=(6, 5))
    if front_mask is None:
        front_mask = np.ones(F.shape[0], dtype=bool)
    front_mask = np.asarray(front_mask, dtype=bool)
    if (~front_mask).any():
        ax.scatter(F[~front_mask, 1], F[~front_mask, 0], c="lightgray", label="dominated")
    ax.scatter(F[front_mask, 1], F[front_mask, 0], c="tab:blue", label="non-dominated")
    if thresholds is not None and all(t is not None for t in thresholds):
        ax.axhline(thresholds[0], color="tab:green", linestyle=":", linewidth=1)
        ax.axvline(thresholds[1], color="tab:green", linestyle=":", linewidth=1)
    ax.set_xlabel(names[1])
    ax.set_ylabel(names[0])
    ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def convergence_chart(iterations, objective_names, path, title="Best observed so far"):
    """Best-so-far per objective against campaign iteration."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [row["iteration"] for row in iterations]
    for j, name in enumerate(objective_names):
        ys = [row["best"][j] for row in iterations]
        ax.plot(xs, ys, marker="o", label=name)
    ax.set_xlabel("iteration (0 = seed block)")
    ax.set_ylabel("best observed")
    ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def desirability_chart(names, individual, composite, path, title="Desirability"):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    bars = [*individual, composite]
    labels = [*names, "composite"]
    ax.bar(labels, bars, color=["tab:blue"] * len(individual) + ["tab:orange"])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("desirability")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
