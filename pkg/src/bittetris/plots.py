"""Figure rendering for training curves and evaluation score distributions."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def save_learning_curve(path, curve, algo: str, xlabel: str) -> None:
    """Render (x, return, seconds) rows as a return-vs-progress line plot."""
    xs = [row[0] for row in curve]
    ys = [row[1] for row in curve]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, ys, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("return (lines cleared)")
    ax.set_title(f"{algo} learning curve")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def save_score_histogram(path, scores, label: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(scores, bins=min(50, max(10, len(scores) // 20)), color="#4878cf")
    ax.set_xlabel("lines cleared per game")
    ax.set_ylabel("games")
    ax.set_title(f"score distribution ({label})")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
