"""Figure output for overlap reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FORMATS = ("png", "svg")

# small, print-friendly defaults; callers can override through rcParams
STYLE = {
    "font.size": 8,
    "axes.titlesize": 9,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "figure.dpi": 150,
    "savefig.bbox": "tight",
}


def _panel(ax, matrix, title: str, mark=frozenset()):
    n = len(matrix.sources)
    data = np.array(matrix.densities, dtype=float)
    im = ax.imshow(data, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(n), matrix.sources, rotation=90)
    ax.set_yticks(range(n), matrix.sources)
    ax.set_title(f"{title} ({len(matrix.connections)} connections)")
    index = {s: i for i, s in enumerate(matrix.sources)}
    for a, b in mark:
        i, j = index[a], index[b]
        for x, y in ((i, j), (j, i)):
            ax.text(x, y, "*", ha="center", va="center", color="white", fontsize=9)
    return im


def plot_overlap_heatmaps(pre, post, stem: str | Path, formats=FORMATS) -> list[Path]:
    """Side-by-side density heatmaps; asterisks flag pairs connected only after normalization."""
    stem = Path(stem)
    new = post.connections - pre.connections
    with plt.rc_context(STYLE):
        size = max(4.0, 0.35 * len(pre.sources) + 2)
        fig, (left, right) = plt.subplots(1, 2, figsize=(2 * size, size), sharey=True)
        _panel(left, pre, "Pre-normalization")
        im = _panel(right, post, "Post-normalization", new)
        right.tick_params(labelleft=False)
        fig.colorbar(im, ax=[left, right], shrink=0.8, label="overlap density")
        written = []
        for fmt in formats:
            path = stem.with_suffix(f".{fmt}")
            fig.savefig(path, format=fmt)
            written.append(path)
        plt.close(fig)
    return written
