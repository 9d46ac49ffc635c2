"""Render the four figure kinds from xordlab CSV outputs.

Pure read-and-draw: no statistics are computed here beyond grouping rows.
Filter scatters draw w-filters in blue and u-filters in red, one panel per
(run, stage) with shared axis limits so initialization and convergence
panels are visually comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import read_rows

FIGURE_KINDS = ("filter-scatter", "error-vs-channels", "angle-histogram",
                "accuracy-vs-trainsize")


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple
    kind: str
    output: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input file is required")


def render(spec: FigureSpec) -> Path:
    """Write a PNG for the spec; returns the output path."""
    draw = {
        "filter-scatter": _draw_filter_scatter,
        "error-vs-channels": _draw_error_vs_channels,
        "angle-histogram": _draw_angle_histogram,
        "accuracy-vs-trainsize": _draw_accuracy_vs_trainsize,
    }[spec.kind]
    fig = draw([Path(p) for p in spec.inputs])
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def _no_data(ax, message="no data"):
    ax.annotate(message, (0.5, 0.5), xycoords="axes fraction",
                ha="center", va="center", color="0.4")


def _draw_filter_scatter(inputs):
    rows = []
    for path in inputs:
        rows += read_rows(path, "filters")
    runs = list(dict.fromkeys(r["run"] for r in rows))  # file order
    stages = [s for s in ("init", "final") if any(r["stage"] == s for r in rows)]
    if not rows:
        fig, ax = plt.subplots(figsize=(4, 4))
        _no_data(ax)
        return fig

    panels = [(run, stage) for run in runs for stage in stages]
    fig, axes = plt.subplots(1, max(len(panels), 1),
                             figsize=(3.2 * max(len(panels), 1), 3.4),
                             squeeze=False)
    xs = [float(r["x"]) for r in rows]
    ys = [float(r["y"]) for r in rows]
    lim = 1.15 * max(max(map(abs, xs)), max(map(abs, ys)), 1e-12)
    for ax, (run, stage) in zip(axes[0], panels):
        sub = [r for r in rows if r["run"] == run and r["stage"] == stage]
        for group, color in (("w", "tab:blue"), ("u", "tab:red")):
            pts = [(float(r["x"]), float(r["y"])) for r in sub
                   if r["group"] == group]
            if pts:
                px, py = zip(*pts)
                ax.scatter(px, py, s=14, color=color, label=group)
        if not sub:
            _no_data(ax)
        ax.set_xlim(-lim, lim)
        ax.set_ylim(-lim, lim)
        ax.axhline(0, color="0.85", lw=0.6)
        ax.axvline(0, color="0.85", lw=0.6)
        ax.set_aspect("equal")
        ax.set_title(f"{run}, {stage}", fontsize=9)
    axes[0][0].legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    return fig


def _draw_error_vs_channels(inputs):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    drew = False
    for path in inputs:
        rows = read_rows(path, "error-vs-channels")
        for gamma in sorted({r["gamma"] for r in rows}):
            sub = sorted((r for r in rows if r["gamma"] == gamma),
                         key=lambda r: float(r["k"]))
            ks = [float(r["k"]) for r in sub]
            if not ks:
                continue
            drew = True
            suffix = f" (gamma={gamma})" if len({r['gamma'] for r in rows}) > 1 else ""
            ax.plot(ks, [float(r["mean_test_error"]) for r in sub],
                    marker="o", label="all runs" + suffix)
            zero = [(k, float(r["mean_test_error_zero_train"])) for k, r in zip(ks, sub)
                    if r["mean_test_error_zero_train"] not in ("", "nan")
                    and not math.isnan(float(r["mean_test_error_zero_train"]))]
            if zero:
                zk, zv = zip(*zero)
                ax.plot(zk, zv, marker="s", linestyle="--",
                        label="zero-train-error runs" + suffix)
    if not drew:
        _no_data(ax)
    ax.set_xscale("log")
    ax.set_xlabel("channels k")
    ax.set_ylabel("test error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _draw_angle_histogram(inputs):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    rows = []
    for path in inputs:
        rows += read_rows(path, "angle-histogram")
    if not rows:
        _no_data(ax)
    else:
        bins = np.linspace(0.0, 90.0, 19)
        for variant, color in (("trained", "tab:blue"), ("random", "tab:orange")):
            angles = [float(r["angle_deg"]) for r in rows if r["variant"] == variant]
            if angles:
                ax.hist(angles, bins=bins, alpha=0.6, color=color, label=variant)
    ax.set_xlabel("angle to closest center (degrees)")
    ax.set_ylabel("filters")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _draw_accuracy_vs_trainsize(inputs):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    rows = []
    for path in inputs:
        rows += read_rows(path, "accuracy-vs-trainsize")
    if not rows:
        _no_data(ax)
    else:
        rows.sort(key=lambda r: float(r["n_train"]))
        ns = [float(r["n_train"]) for r in rows]
        series = (("cluster_init_acc", "cluster-initialized small net", "tab:blue"),
                  ("best_random_acc", "random-init small net (best of grid)", "tab:red"),
                  ("big_net_acc", "large net", "tab:green"))
        for col, label, color in series:
            ax.plot(ns, [float(r[col]) for r in rows], marker="o",
                    color=color, label=label)
    ax.set_xlabel("training set size")
    ax.set_ylabel("test accuracy")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig
