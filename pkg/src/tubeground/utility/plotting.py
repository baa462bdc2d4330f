"""Static figures of experiment results.

Requires the ``plotting`` extra (``matplotlib`` and ``seaborn``).
"""
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from tubeground._internal_support.types import PathLikeType  # noqa: E402

ERROR_BAR_CAPSIZE: float = 0.1


def configure() -> None:
    """Call all configure-functions in this module."""
    configure_seaborn()
    configure_matplotlib()


def configure_seaborn() -> None:
    """Configure Seaborn figure plotting."""
    sns.set_theme(context="notebook")


def configure_matplotlib() -> None:
    """Configure Matplotlib figure plotting."""
    plt.rcParams["figure.figsize"] = (12, 5)
    plt.rcParams["figure.autolayout"] = True


def plot_series(
    data: pd.DataFrame,
    x: str,
    y: str,
    hue: str = "label",
    title: Optional[str] = None,
    path: Optional[PathLikeType] = None,
) -> plt.Figure:
    """Plot one line per `hue` group, eg the loss curves of a convergence experiment.

    Repeated `x` values within a group (eg several seeds) are drawn as a mean with a confidence band.

    Args:
        data: Long-format data.
        x: Column on the X-axis.
        y: Column on the Y-axis.
        hue: Column that identifies each series.
        title: Figure title.
        path: If given, save the figure here.

    Returns:
        The figure.
    """
    fig, ax = plt.subplots()
    sns.lineplot(data=data, x=x, y=y, hue=hue, ax=ax)
    if title:
        ax.set_title(title)
    if path is not None:
        fig.savefig(Path(path))
    return fig


def plot_heatmap(
    similarity: np.ndarray,
    words: Sequence[str],
    selected: Optional[int] = None,
    title: Optional[str] = None,
    path: Optional[PathLikeType] = None,
) -> plt.Figure:
    """Plot a ``queries x words`` similarity matrix.

    Args:
        similarity: Matrix of shape ``N x L``.
        words: Column labels.
        selected: Row to highlight.
        title: Figure title.
        path: If given, save the figure here.

    Returns:
        The figure.
    """
    n, length = similarity.shape
    fig, ax = plt.subplots(figsize=(max(4, length), max(3, n * 0.3)))
    sns.heatmap(similarity, vmin=-1, vmax=1, cmap="vlag", xticklabels=list(words), yticklabels=range(n), ax=ax)
    ax.set_xlabel("word")
    ax.set_ylabel("query")
    if selected is not None:
        ax.add_patch(plt.Rectangle((0, selected), length, 1, fill=False, edgecolor="black", lw=2))
    if title:
        ax.set_title(title)
    if path is not None:
        fig.savefig(Path(path))
    return fig
