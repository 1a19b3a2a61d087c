#!/usr/bin/env python3
"""Render figure panels from the CSV tables emitted by `borrowkit reproduce`.

Pure presentation: every number is read from the CSVs, nothing is recomputed.
Each figure is a 3x2 grid of panels; one line per decision rule with a stable
rule-to-style mapping. The RSL axis is clamped at 1.4 (the raw CSV values are
left untouched), and sensitivity panels draw a dashed grey reference line at
the informative prior mean.

Usage:
    plots/render.py --figure fig2 --csv-dir out/ --out fig2.png
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

RULE_STYLES = {
    "fd": ("FD", "#333333", "-"),
    "bd": ("BD", "#1f77b4", "-"),
    "cd": ("CD", "#d62728", "-"),
    "cd_adapt": ("CD-Adapt", "#9467bd", "--"),
    "rmd_unit": ("RMD-Unit", "#2ca02c", "-"),
    "rmd_vague": ("RMD-Vague", "#ff7f0e", "-"),
    "rmd_unif": ("RMD-unif", "#2ca02c", "-"),
    "rmd_pm": ("RMD-PM", "#ff7f0e", "-"),
    "ti_rbd": ("TI-RBD", "#8c564b", "-"),
}
FALLBACK_STYLE = ("#7f7f7f", ":")

RSL_CLAMP = 1.4

AXIS_LABELS = {
    "w": "borrowing weight w",
    "sampling_mean": "sampling prior mean",
    "rsl": "RSL",
    "type_one_error": "type I error rate",
    "expected_power": "expected power",
    "integrated_risk": "integrated risk",
    "min_n": "minimum sample size",
}


@dataclass(frozen=True)
class PanelSpec:
    """One panel: which CSV, which columns, and its decorations."""

    csv_name: str
    x: str
    y: str
    title: str
    clamp_top: float | None = None
    reference_x: float | None = None


def _weight_figure(figure_id: str) -> list:
    panels = []
    for metric in ("rsl", "type_one_error", "expected_power"):
        for n in (20, 100):
            panels.append(
                PanelSpec(
                    csv_name=f"{figure_id}_{metric}_n{n}.csv",
                    x="w",
                    y=metric,
                    title=f"{AXIS_LABELS[metric]}, n={n}",
                    clamp_top=RSL_CLAMP if metric == "rsl" else None,
                )
            )
    return panels


def _samplesize_figure(figure_id: str, prior_mean: float) -> list:
    panels = []
    for metric in ("min_n", "type_one_error", "expected_power"):
        panels.append(
            PanelSpec(
                csv_name=f"{figure_id}_{metric}_vs_w.csv",
                x="w",
                y=metric,
                title=f"{AXIS_LABELS[metric]} vs w",
            )
        )
        panels.append(
            PanelSpec(
                csv_name=f"{figure_id}_{metric}_vs_mean.csv",
                x="sampling_mean",
                y=metric,
                title=f"{AXIS_LABELS[metric]} vs sampling mean",
                reference_x=prior_mean,
            )
        )
    return panels


def _sensitivity_figure(figure_id: str, prior_mean: float) -> list:
    panels = []
    for metric in ("integrated_risk", "type_one_error", "expected_power"):
        for n in (20, 100):
            panels.append(
                PanelSpec(
                    csv_name=f"{figure_id}_{metric}_n{n}.csv",
                    x="sampling_mean",
                    y=metric,
                    title=f"{AXIS_LABELS[metric]}, n={n}",
                    reference_x=prior_mean,
                )
            )
    return panels


# informative prior means: 0.25 in the normal study, 0.5 (Beta(21,21)) in the
# binomial one; used only for the dashed reference line
FIGURES = {
    "fig2": _weight_figure("fig2"),
    "fig3": _samplesize_figure("fig3", 0.25),
    "fig4": _sensitivity_figure("fig4", 0.25),
    "s1": _weight_figure("s1"),
    "s2": _samplesize_figure("s2", 0.5),
    "s3": _sensitivity_figure("s3", 0.5),
}


def read_panel_series(path: Path, x_col: str, y_col: str) -> dict:
    """Per-rule (x, y) series from one panel CSV, in file order."""
    series: dict = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = {x_col, y_col, "rule"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path.name}: missing column {sorted(missing)[0]!r}")
        for row in reader:
            if row[x_col] == "" or row[y_col] == "":
                continue
            series.setdefault(row["rule"], []).append((float(row[x_col]), float(row[y_col])))
    return series


def build_figure(figure_id: str, csv_dir: str):
    """Assemble the 3x2 panel grid for one figure id. Missing CSVs raise
    FileNotFoundError; header-only CSVs yield empty axes with a warning."""
    panels = FIGURES[figure_id]
    csv_dir = Path(csv_dir)
    for panel in panels:
        if not (csv_dir / panel.csv_name).exists():
            raise FileNotFoundError(f"missing panel CSV: {csv_dir / panel.csv_name}")
    fig, axes = plt.subplots(3, 2, figsize=(9.5, 11.0))
    seen_rules: dict = {}
    for panel, ax in zip(panels, axes.ravel()):
        series = read_panel_series(csv_dir / panel.csv_name, panel.x, panel.y)
        if not series:
            print(f"warning: {panel.csv_name} has no data rows", file=sys.stderr)
        for rule, points in series.items():
            label, color, style = RULE_STYLES.get(rule, (rule, *FALLBACK_STYLE))
            xs, ys = zip(*points)
            (line,) = ax.plot(xs, ys, color=color, linestyle=style, linewidth=1.6)
            seen_rules.setdefault(label, line)
        if panel.reference_x is not None:
            ax.axvline(panel.reference_x, color="grey", linestyle="--", linewidth=1.0)
        if panel.clamp_top is not None:
            lo, _ = ax.get_ylim()
            ax.set_ylim(min(lo, 0.0), panel.clamp_top)
        ax.set_title(panel.title, fontsize=10)
        ax.set_xlabel(AXIS_LABELS.get(panel.x, panel.x), fontsize=9)
        ax.set_ylabel(AXIS_LABELS.get(panel.y, panel.y), fontsize=9)
        ax.tick_params(labelsize=8)
    if seen_rules:
        fig.legend(
            seen_rules.values(),
            seen_rules.keys(),
            loc="lower center",
            ncol=min(len(seen_rules), 7),
            fontsize=9,
            frameon=False,
        )
    fig.suptitle(figure_id, fontsize=12)
    fig.tight_layout(rect=(0.0, 0.04, 1.0, 0.98))
    return fig


def render(figure_id: str, csv_dir: str, out_path: str) -> None:
    fig = build_figure(figure_id, csv_dir)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--figure", required=True, choices=sorted(FIGURES))
    parser.add_argument("--csv-dir", required=True, help="directory holding the panel CSVs")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(args.figure, args.csv_dir, args.out)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
