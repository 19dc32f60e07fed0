"""
RPIlab: SVG plots of CSV artifacts.

Copyright 2024 RPIlab Developers
"""

import pathlib
from typing import Dict, Tuple

import matplotlib
from matplotlib.figure import Figure
import numpy
import pandas

# Columns plotted by each plot kind, (x, y).
PLOT_COLUMNS: Dict[str, Tuple[str, str]] = {
    "scan": ("offset", "prob"),
    "decay": ("t", "coherence"),
    "ladder": ("dt", "trace_dist"),
}

# Axis labels with units, hbar = 1.
AXIS_LABELS = {
    "offset": "offset [pointer units]",
    "prob": "prob [1]",
    "t": "t [time units]",
    "coherence": "coherence [1]",
    "dt": "dt [time units]",
    "trace_dist": "trace_dist [1]",
}

TITLES = {
    "scan": "RPIlab: corridor weight vs. offset from branch trajectory",
    "decay": "RPIlab: Lindblad coherence decay",
    "ladder": "RPIlab: per-slice channel vs. Lindblad limit",
}

# Reproducible bytes: fixed id salt, glyphs as paths, no date stamp.
_SVG_RC = {"svg.hashsalt": "rpilab", "svg.fonttype": "path"}


def emit_plot(csv_path: pathlib.Path, kind: str) -> pathlib.Path:
    """
    Render a CSV artifact as a standalone SVG next to it.

    Parameters
    ----------
    csv_path
        CSV artifact
    kind
        Plot kind, one of scan, decay, ladder

    Returns
    -------
    svg_path
        Written SVG file, the CSV path with suffix .svg

    Raises
    ------
    ValueError
        If the kind is unknown, or the CSV lacks the kind's columns or has no rows
    """
    if kind not in PLOT_COLUMNS:
        raise ValueError(
            f"unrecognized plot kind '{kind}', expected one of {sorted(PLOT_COLUMNS)}"
        )

    csv_path = pathlib.Path(csv_path)
    frame = pandas.read_csv(csv_path)
    x_name, y_name = PLOT_COLUMNS[kind]
    missing = [name for name in (x_name, y_name) if name not in frame.columns]

    if missing:
        raise ValueError(
            f"csv artifact '{csv_path.name}' lacks columns {missing} for plot kind "
            f"'{kind}'"
        )

    if len(frame) == 0:
        raise ValueError(f"csv artifact '{csv_path.name}' has no rows")

    x = frame[x_name].to_numpy(dtype=float)
    y = frame[y_name].to_numpy(dtype=float)
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()

    if kind == "scan":
        order = numpy.argsort(x, kind="stable")
        ax.plot(x[order], y[order], "o-")
    elif kind == "decay":
        positive = y > 0
        ax.semilogy(x[positive], y[positive], ".-")

        if positive.sum() >= 2:
            slope, _ = numpy.polyfit(x[positive], numpy.log(y[positive]), 1)
            ax.annotate(
                f"slope of ln(coherence) = {slope:.6g}",
                xy=(0.05, 0.05),
                xycoords="axes fraction",
            )
    else:
        ax.plot(x, y, "o-")

        if numpy.all(x > 0) and numpy.all(y > 0):
            ax.set_xscale("log")
            ax.set_yscale("log")

    ax.set_title(TITLES[kind])
    ax.set_xlabel(AXIS_LABELS[x_name])
    ax.set_ylabel(AXIS_LABELS[y_name])
    fig.tight_layout()
    svg_path = csv_path.with_suffix(".svg")

    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(svg_path, format="svg", metadata={"Date": None})

    return svg_path
