#!/usr/bin/env python3
"""Render the eight study figures from a results CSV and analysis report.

Usage: make_figures.py RESULTS.csv REPORT.json --out DIR --seed S --format png|svg

Reads only the two artifact files; figures are pure functions of
(CSV, report, seed).  Images are written atomically: a failure leaves no
partial files in the output directory.
"""

import argparse
import csv
import json
import math
import random
import sys
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from mpl_toolkits.mplot3d import Axes3D  # noqa: F401,E402

REQUIRED_COLUMNS = ("program_id", "steps", "total_cases", "size_bytes")

POINT_STYLE = dict(s=8, alpha=0.5, linewidths=0, color="tab:blue")


class FigureError(Exception):
    pass


def load_rows(csv_path):
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise FigureError(f"{csv_path}: missing columns {', '.join(missing)}")
        rows = [
            {c: int(row[c]) for c in REQUIRED_COLUMNS}
            for row in reader
        ]
    if not rows:
        raise FigureError(f"{csv_path}: no data rows")
    return rows


def load_report(report_path):
    with open(report_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("summary", "pairs", "grouped_medians", "grid"):
        if key not in doc:
            raise FigureError(f"{report_path}: missing report section {key!r}")
    return doc


def parse_cell_keys(table):
    return {tuple(int(p) for p in key.split(",")): value
            for key, value in table.items()}


def jitter(values, rnd, amplitude=0.3):
    return [v + rnd.uniform(-amplitude, amplitude) for v in values]


def fig2_size_histogram(rows, report):
    fig, ax = plt.subplots(figsize=(7, 5))
    sizes = [r["size_bytes"] for r in rows]
    ax.hist(sizes, bins=40, color="tab:blue", edgecolor="white")
    ax.set_xlabel("Regenerated program size (bytes)")
    ax.set_ylabel("Number of programs")
    ax.set_title("Regenerated program sizes")
    return fig


def fig3_facets_by_steps(rows, report):
    step_values = sorted({r["steps"] for r in rows})
    cols = 4
    facet_rows = math.ceil(len(step_values) / cols)
    fig, axes = plt.subplots(
        facet_rows, cols, figsize=(3 * cols, 2.5 * facet_rows),
        sharex=True, sharey=True, squeeze=False,
    )
    for ax in axes.flat:
        ax.set_visible(False)
    for ax, k in zip(axes.flat, step_values):
        ax.set_visible(True)
        pts = [r for r in rows if r["steps"] == k]
        ax.scatter([r["total_cases"] for r in pts],
                   [r["size_bytes"] for r in pts], **POINT_STYLE)
        ax.set_title(f"{k} steps", fontsize=9)
    fig.supxlabel("Total test cases")
    fig.supylabel("Program size (bytes)")
    fig.suptitle("Program size by test cases for each number of steps")
    return fig


def fig4_median_scatter(rows, report):
    medians = parse_cell_keys(report["grouped_medians"])
    fig, ax = plt.subplots(figsize=(7, 5))
    steps = [k for k, _ in medians]
    cases = [c for _, c in medians]
    values = list(medians.values())
    sc = ax.scatter(steps, cases, c=values, cmap="viridis", s=25, linewidths=0)
    fig.colorbar(sc, ax=ax, label="Median program size (bytes)")
    ax.set_xlabel("Steps")
    ax.set_ylabel("Total test cases")
    ax.set_title("Median program size by steps and cases")
    return fig


def fig5_surface(rows, report):
    grid = parse_cell_keys(report["grid"])
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    steps = [k for k, _ in grid]
    cases = [c for _, c in grid]
    values = list(grid.values())
    ax.plot_trisurf(steps, cases, values, cmap="viridis", linewidth=0.1)
    ax.set_xlabel("Steps")
    ax.set_ylabel("Total test cases")
    ax.set_zlabel("Mean program size (bytes)")
    ax.set_title("Program size by steps and test cases")
    return fig


def _jittered_scatter(rows, x_column, x_label, title, rnd):
    fig, ax = plt.subplots(figsize=(7, 5))
    xs = jitter([r[x_column] for r in rows], rnd)
    ax.scatter(xs, [r["size_bytes"] for r in rows], **POINT_STYLE)
    ax.set_xlabel(f"{x_label} (jittered)")
    ax.set_ylabel("Program size (bytes)")
    ax.set_title(title)
    return fig


def _sqrt_scatter(rows, x_column, x_label, title):
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.scatter([math.sqrt(r[x_column]) for r in rows],
               [math.sqrt(r["size_bytes"]) for r in rows], **POINT_STYLE)
    ax.set_xlabel(f"sqrt({x_label})")
    ax.set_ylabel("sqrt(program size)")
    ax.set_title(title)
    return fig


def render_all(rows, report, seed):
    rnd = random.Random(seed)
    yield 2, fig2_size_histogram(rows, report)
    yield 3, fig3_facets_by_steps(rows, report)
    yield 4, fig4_median_scatter(rows, report)
    yield 5, fig5_surface(rows, report)
    yield 6, _jittered_scatter(rows, "total_cases", "Total test cases",
                               "Program size by test cases", rnd)
    yield 7, _jittered_scatter(rows, "steps", "Steps",
                               "Program size by steps", rnd)
    yield 8, _sqrt_scatter(rows, "total_cases", "total test cases",
                           "Modified program size by test cases")
    yield 9, _sqrt_scatter(rows, "steps", "steps",
                           "Modified program size by steps")


def make_figures(csv_path, report_path, out_dir, seed=0, image_format="png"):
    """Render figures 2-9; returns the list of written paths."""
    if image_format not in ("png", "svg"):
        raise FigureError(f"unsupported format {image_format!r}")
    rows = load_rows(csv_path)
    report = load_report(report_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    plt.rcParams["svg.hashsalt"] = str(seed)
    save_kwargs = {"metadata": {"Date": None}} if image_format == "svg" else {}

    # render everything into a staging directory first so a failure partway
    # through leaves the output directory untouched
    written = []
    with tempfile.TemporaryDirectory(dir=out_dir) as staging:
        staged = []
        for figure_id, fig in render_all(rows, report, seed):
            name = f"fig{figure_id}.{image_format}"
            path = Path(staging) / name
            fig.savefig(path, dpi=100, **save_kwargs)
            plt.close(fig)
            staged.append((path, out_dir / name))
        for src, dst in staged:
            src.replace(dst)
            written.append(dst)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render the eight study figures from a results CSV "
                    "and analysis report"
    )
    parser.add_argument("results", help="results CSV from the study command")
    parser.add_argument("report", help="analysis report JSON")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="jitter seed")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)
    try:
        written = make_figures(args.results, args.report, args.out,
                               seed=args.seed, image_format=args.format)
    except (FigureError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
