"""Plot mean overlap against epsilon from a sweep CSV.

One curve per group value (eta by default), each paired with a dashed,
color-matched vertical line at the group's detectability threshold. The
threshold is located purely from the CSV, as the sign change of
xi1 - K*R along the x column, so this package never recomputes model math;
the sweep file is the single source of truth.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class FigvizError(ValueError):
    """Bad input CSV or plot specification."""


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str | Path
    output_image: str | Path
    group_key: str = "eta"
    x: str = "epsilon"
    y: str = "overlap"
    threshold_lines: bool = True
    errorbars: bool = False
    dpi: int = 150


@dataclass(frozen=True)
class GroupSeries:
    xs: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    threshold: float | None


@dataclass(frozen=True)
class RenderResult:
    output_image: Path
    groups: dict = field(default_factory=dict)  # group value -> GroupSeries

    @property
    def thresholds(self) -> dict:
        return {g: s.threshold for g, s in self.groups.items()}


def read_sweep_csv(path: str | Path) -> list[dict]:
    """Rows of the sweep file, '#' comment lines skipped, values as strings."""
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip() and not line.startswith("#")]
    if not lines:
        raise FigvizError(f"{path}: no data lines")
    rows = list(csv.DictReader(lines))
    if not rows:
        raise FigvizError(f"{path}: header only, no rows")
    return rows


def _column(rows: list[dict], name: str) -> np.ndarray:
    if name not in rows[0]:
        raise FigvizError(
            f"missing column {name!r}; have {sorted(rows[0])}"
        )
    try:
        return np.array([float(row[name]) for row in rows])
    except ValueError as exc:
        raise FigvizError(f"column {name!r} is not numeric: {exc}") from None


def locate_threshold(xs: np.ndarray, gaps: np.ndarray) -> float | None:
    """Abscissa of the last sign change of ``gaps`` along sorted ``xs``.

    Linear interpolation between the bracketing grid points; None when the
    gap never changes sign.
    """
    signs = np.sign(gaps)
    crossings = np.flatnonzero(signs[:-1] != signs[1:])
    if crossings.size == 0:
        return None
    i = int(crossings[-1])
    g0, g1 = gaps[i], gaps[i + 1]
    if g0 == g1:
        return float(xs[i])
    frac = g0 / (g0 - g1)
    return float(xs[i] + frac * (xs[i + 1] - xs[i]))


def render(spec: PlotSpec) -> RenderResult:
    """Aggregate, plot, and write the figure; returns the plotted series."""
    rows = read_sweep_csv(spec.input_csv)
    if "status" in rows[0]:
        rows = [row for row in rows if row["status"] == "ok"]
        if not rows:
            raise FigvizError(f"{spec.input_csv}: every row carries an error status")
    group_vals = _column(rows, spec.group_key)
    xs = _column(rows, spec.x)
    ys = _column(rows, spec.y)
    if spec.threshold_lines:
        xi1 = _column(rows, "xi1")
        kr = _column(rows, "K") * _column(rows, "R")

    result_groups: dict = {}
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for gval in sorted(set(group_vals.tolist())):
        mask = group_vals == gval
        grid = np.array(sorted(set(xs[mask].tolist())))
        means = np.empty(grid.size)
        stds = np.empty(grid.size)
        for idx, x0 in enumerate(grid):
            sel = ys[mask & (xs == x0)]
            sel = sel[~np.isnan(sel)]
            if sel.size == 0:
                raise FigvizError(
                    f"group {spec.group_key}={gval} has no usable rows at {spec.x}={x0}"
                )
            means[idx] = sel.mean()
            stds[idx] = sel.std()

        label = f"{spec.group_key} = {gval:g}"
        if spec.errorbars and (stds > 0).any():
            line = ax.errorbar(grid, means, yerr=stds, marker="o", capsize=3,
                               label=label)[0]
        else:
            (line,) = ax.plot(grid, means, marker="o", label=label)

        threshold = None
        if spec.threshold_lines:
            gap_by_x = []
            for x0 in grid:
                sel = np.flatnonzero(mask & (xs == x0))[0]
                gap_by_x.append(xi1[sel] - kr[sel])
            threshold = locate_threshold(grid, np.array(gap_by_x))
            if threshold is not None:
                ax.axvline(threshold, linestyle="--", color=line.get_color())
        result_groups[gval] = GroupSeries(
            xs=grid, means=means, stds=stds, threshold=threshold
        )

    ax.set_xlabel(spec.x)
    ax.set_ylabel(f"mean {spec.y}")
    ax.legend()
    out = Path(spec.output_image)
    metadata = {"Date": None} if out.suffix.lower() == ".svg" else None
    fig.savefig(out, dpi=spec.dpi, metadata=metadata)
    plt.close(fig)
    return RenderResult(output_image=out, groups=result_groups)
