"""Figure rendering for the experiment report path.

Figures are saved as PNG next to the delimited output. Rendering is
deterministic: fixed Agg backend, fixed dpi, fixed metadata, no timestamps.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": "stpuf"}}


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def save_histogram(
    path: str | Path,
    datasets: Sequence[tuple[str, Sequence[float]]],
    bins: int = 60,
    xlabel: str = "",
    title: str = "",
    log_y: bool = False,
) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, values in datasets:
        ax.hist(list(values), bins=bins, alpha=0.55, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    if log_y:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    if len(datasets) > 1 or datasets[0][0]:
        ax.legend()
    return _finish(fig, path)


def save_bars(
    path: str | Path,
    categories: Sequence[str],
    series: dict[str, Sequence[float]],
    ylabel: str = "",
    title: str = "",
) -> Path:
    fig, ax = plt.subplots(figsize=(7.2, 4.0))
    width = 0.8 / max(len(series), 1)
    for i, (label, ys) in enumerate(series.items()):
        xs = [j + i * width for j in range(len(categories))]
        ax.bar(xs, list(ys), width=width, label=label)
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(categories))])
    ax.set_xticklabels(categories, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    return _finish(fig, path)


def save_series(
    path: str | Path,
    x: Sequence[float],
    series: dict[str, Sequence[float]],
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, ys in series.items():
        ax.plot(list(x), list(ys), marker="o", markersize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)
