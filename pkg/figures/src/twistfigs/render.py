"""Batch figure rendering from counter CSVs.

Four figure families mirror the published ratio plots: the vanishing
ratio (one line, the l = 0 counter over its growth comparator), the
paired +-l ratios (one panel per |l|, upper/lower lines), the cumulative
small-norm s-ratios (one line per threshold L), and the m-ratios (one
line per exponent c).  Rendering is a pure function of the input CSV:
identical inputs produce byte-identical image files.

Input schemas (produced by the sweep tool's stats command):
    n_counts.csv: x,l,count,comparator,ratio
    s_counts.csv: x,L,count,comparator,ratio
    m_counts.csv: x,c,count,count_pos,comparator,ratio,ratio_pos
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "FAMILIES", "render", "main"]

FAMILIES = ("vanishing", "pm_l", "s_ratio", "m_ratio")

_REQUIRED_COLUMNS = {
    "vanishing": ("x", "l", "ratio"),
    "pm_l": ("x", "l", "ratio"),
    "s_ratio": ("x", "L", "ratio"),
    "m_ratio": ("x", "c", "ratio"),
}


class MissingColumnsError(ValueError):
    def __init__(self, path, missing):
        super().__init__(f"{path}: missing columns {sorted(missing)}")
        self.missing = tuple(sorted(missing))


@dataclass(frozen=True)
class FigureSpec:
    """One figure: a counter family read from a CSV, rendered to an image."""

    input: Path
    family: str  # one of FAMILIES
    output: Path
    select: tuple[float, ...] = ()  # keys (l, L or c values) to plot; empty = all
    title: str = ""
    xlabel: str = "conductor bound x"
    ylabel: str = "count / comparator"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")


def _read_table(path: Path, key_column: str, required) -> dict[float, tuple[np.ndarray, np.ndarray]]:
    """Parse the CSV into {key: (x, ratio)} series, keys in file order."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        missing = set(required) - set(reader.fieldnames)
        if missing:
            raise MissingColumnsError(path, missing)
        series: dict[float, list[tuple[float, float]]] = {}
        for row in reader:
            key = float(row[key_column])
            series.setdefault(key, []).append((float(row["x"]), float(row["ratio"])))
    if not series:
        raise ValueError(f"{path}: no data rows")
    out = {}
    for key, pts in series.items():
        arr = np.array(pts)
        out[key] = (arr[:, 0], arr[:, 1])
    return out


def _new_axes(n_panels: int):
    if n_panels <= 1:
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
        return fig, [ax]
    cols = 2
    rows = (n_panels + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(9.5, 3.2 * rows), dpi=150, squeeze=False)
    return fig, [ax for row in axes for ax in row]


def render(spec: FigureSpec) -> Path:
    """Render one figure family to spec.output; returns the written path."""
    key_col = {"vanishing": "l", "pm_l": "l", "s_ratio": "L", "m_ratio": "c"}[spec.family]
    table = _read_table(Path(spec.input), key_col, _REQUIRED_COLUMNS[spec.family])

    if spec.family == "vanishing":
        if 0.0 not in table:
            raise ValueError(f"{spec.input}: no l = 0 rows for the vanishing family")
        fig, axes = _new_axes(1)
        x, r = table[0.0]
        axes[0].plot(x, r, color="tab:blue", lw=1.2)
        axes[0].set_xscale("log")
    elif spec.family == "pm_l":
        magnitudes = sorted({abs(k) for k in table if k != 0})
        if spec.select:
            magnitudes = [m for m in magnitudes if m in set(abs(v) for v in spec.select)]
        if not magnitudes:
            raise ValueError(f"{spec.input}: no non-zero l values to plot")
        fig, axes = _new_axes(len(magnitudes))
        for ax, m in zip(axes, magnitudes):
            for sign, colour in ((m, "tab:blue"), (-m, "tab:red")):
                if sign in table:
                    x, r = table[sign]
                    ax.plot(x, r, color=colour, lw=1.0, label=f"l = {int(sign)}")
            ax.set_xscale("log")
            ax.legend(fontsize=7)
        for ax in axes[len(magnitudes):]:
            ax.set_visible(False)
    else:  # s_ratio / m_ratio: one panel, one line per key, ordered by key
        keys = sorted(table)
        if spec.select:
            keys = [k for k in keys if k in set(spec.select)]
        if not keys:
            raise ValueError(f"{spec.input}: nothing selected to plot")
        fig, axes = _new_axes(1)
        cmap = plt.get_cmap("viridis")
        for i, key in enumerate(keys):
            x, r = table[key]
            label = f"{'L' if spec.family == 's_ratio' else 'c'} = {key:g}"
            axes[0].plot(x, r, color=cmap(i / max(len(keys) - 1, 1)), lw=1.0, label=label)
        axes[0].set_xscale("log")
        axes[0].legend(fontsize=7, ncols=2)

    for ax in axes:
        if ax.get_visible():
            ax.set_xlabel(spec.xlabel, fontsize=8)
            ax.set_ylabel(spec.ylabel, fontsize=8)
            ax.tick_params(labelsize=7)
    if spec.title:
        fig.suptitle(spec.title, fontsize=10)
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="twistfigs", description=__doc__)
    p.add_argument("--input", required=True, help="counter CSV from the stats command")
    p.add_argument("--figure", required=True, choices=FAMILIES)
    p.add_argument("--output", required=True, help="output image path (.png or .svg)")
    p.add_argument("--select", default=None, help="comma list of l/L/c values to include")
    p.add_argument("--title", default="")
    args = p.parse_args(argv)
    select = tuple(float(v) for v in args.select.split(",")) if args.select else ()
    try:
        path = render(
            FigureSpec(
                input=Path(args.input),
                family=args.figure,
                output=Path(args.output),
                select=select,
                title=args.title,
            )
        )
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
