import numpy as np
import pandas as pd
import pytest

pytest.importorskip("matplotlib")
pytest.importorskip("seaborn")

import matplotlib.pyplot as plt  # noqa: E402

from tubeground.utility.plotting import configure, plot_heatmap, plot_series  # noqa: E402


def test_plot_series(tmp_path):
    configure()
    data = pd.DataFrame(
        {
            "label": ["content-aware"] * 6 + ["content-agnostic"] * 6,
            "seed": [0, 0, 0, 1, 1, 1] * 2,
            "epoch": [1, 2, 3] * 4,
            "accuracy@0.5": np.linspace(0, 1, 12),
        }
    )
    fig = plot_series(data, "epoch", "accuracy@0.5", title="accuracy", path=tmp_path / "accuracy.png")
    (ax,) = fig.axes
    assert ax.get_title() == "accuracy"
    assert {"content-agnostic", "content-aware"} <= {t.get_text() for t in ax.get_legend().get_texts()}
    assert (tmp_path / "accuracy.png").stat().st_size > 0
    plt.close(fig)


def test_plot_heatmap(tmp_path):
    similarity = np.linspace(-1, 1, 12).reshape(3, 4)
    words = ["the", "red", "square", "moves"]
    fig = plot_heatmap(similarity, words, selected=1, title="v0", path=tmp_path / "v0.png")
    ax = fig.axes[0]
    assert [t.get_text() for t in ax.get_xticklabels()] == words
    assert ax.get_title() == "v0"
    assert (tmp_path / "v0.png").is_file()
    plt.close(fig)
