"""Static SVG figures rendered with matplotlib."""

from __future__ import annotations

import matplotlib

matplotlib.use("svg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..errors import InvalidArgument  # noqa: E402

PLOT_KINDS = ("line", "band", "bar")
HIGHLIGHT = "#c0392b"
NEUTRAL = "#7f8c8d"


def _finish(fig, path):
    with plt.rc_context({"svg.hashsalt": "cyberxrl", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def render_plot(series, kind, path, title="", xlabel="", ylabel=""):
    """Write one SVG figure.

    ``series`` maps a label to data whose shape depends on ``kind``:
    ``line`` takes ``(x, y)`` pairs; ``band`` takes a list of equal-length
    per-seed y sequences and draws their mean inside a min/max envelope;
    ``bar`` takes a single sequence of per-action values and highlights the
    largest bar.
    """
    if kind not in PLOT_KINDS:
        raise InvalidArgument(f"plot kind must be one of {PLOT_KINDS}")
    if not series or any(len(v) == 0 for v in series.values()):
        raise InvalidArgument("cannot plot an empty series")
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if kind == "line":
        for label, pts in series.items():
            xs, ys = zip(*pts)
            ax.plot(xs, ys, label=label)
    elif kind == "band":
        for label, runs in series.items():
            width = min(len(r) for r in runs)
            arr = np.array([list(r)[:width] for r in runs], dtype=float)
            x = np.arange(1, width + 1)
            ax.plot(x, arr.mean(axis=0), label=f"{label} (mean of {len(runs)})")
            ax.fill_between(x, arr.min(axis=0), arr.max(axis=0), alpha=0.25)
    else:
        for label, values in series.items():
            values = np.asarray(values, dtype=float)
            best = int(np.argmax(values))
            colors = [HIGHLIGHT if i == best else NEUTRAL for i in range(len(values))]
            ax.bar(np.arange(1, len(values) + 1), values, color=colors, label=label)
            ax.set_xticks(np.arange(1, len(values) + 1))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if kind != "bar":
        ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    return _finish(fig, path)
