"""CSV, gnuplot data and PNG output for experiment runs."""
from __future__ import annotations

from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

PathLike = Union[str, Path]


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """Writes ``frame`` without its index, '.' decimals and LF line endings."""
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def write_dat(frame: pd.DataFrame, columns: Sequence[str],
              path: PathLike) -> Path:
    """Whitespace-separated columns with a '#' header, readable by gnuplot."""
    path = Path(path)
    with open(path, "w", newline="\n") as f:
        f.write("# " + " ".join(columns) + "\n")
        for row in frame[list(columns)].itertuples(index=False):
            f.write(" ".join(repr(float(v)) for v in row) + "\n")
    return path


def line_plot(frame: pd.DataFrame, x: str, series: Sequence[str],
              path: PathLike, title: str = "",
              ylabel: str = "") -> Path:
    """One axis, one line per column in ``series``, saved as an image."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 5))
    for col in series:
        ax.plot(frame[x], frame[col], label=col)
    ax.set_xlabel(x)
    if ylabel:
        ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if series:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def emit_outputs(report: Optional[pd.DataFrame],
                 logs: Mapping[str, pd.DataFrame],
                 out_dir: PathLike,
                 trace: Optional[pd.DataFrame] = None,
                 title: str = "") -> List[Path]:
    """Writes every output file of one run into ``out_dir``.

    Args:
      report: Training metrics. Written to ``metrics.csv`` and plotted as
        ``loss.png`` with every ``*_loss`` column against epoch.
      logs: Log tables keyed by file stem, each written to ``<stem>.csv``.
      out_dir: Created if missing.
      trace: Optional per-cycle dynamics with a ``time`` column; every other
        column becomes a series of ``dynamics.png``.
      title: Plot title.

    Returns:
      The paths written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if report is not None:
        written.append(write_csv(report, out / "metrics.csv"))
        losses = [c for c in report.columns if c.endswith("_loss")]
        if len(report) and losses:
            written.append(write_dat(report, ["epoch"] + losses,
                                     out / "loss.dat"))
            written.append(line_plot(report, "epoch", losses,
                                     out / "loss.png", title, "loss"))
    for stem, frame in logs.items():
        written.append(write_csv(frame, out / "{0}.csv".format(stem)))
    if trace is not None:
        series = [c for c in trace.columns if c != "time"]
        written.append(write_dat(trace, ["time"] + series,
                                 out / "dynamics.dat"))
        written.append(line_plot(trace, "time", series,
                                 out / "dynamics.png", title))
    return written
