"""Render analysis outputs as figures with tab-delimited companions.

Every render_* function writes a .png and a matching .tsv into the output
directory and returns the written paths, so downstream tooling can pick up
either form.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import PASS_THRESHOLD, PropertyReport
from .ranking import (
    RankingTable,
    StabilityTable,
    agreement_matrix,
    bootstrap_stability,
    ranking_table,
)

__all__ = [
    "render_ranking",
    "render_agreement",
    "render_stability",
    "render_battery",
    "render_report",
]


def _tsv(path: Path, header, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=140, bbox_inches="tight")
    plt.close(fig)
    return path


def render_ranking(table: RankingTable, out_dir) -> list[Path]:
    """Win-rate bar chart (BT-implied rates overlaid) plus the full table."""
    out_dir = Path(out_dir)
    tsv = out_dir / "ranking.tsv"
    tsv.write_text(table.to_tsv(), encoding="utf-8")

    order = list(reversed(table.methods))  # best on top
    y = np.arange(len(order))
    observed = [table.win_rate[m] for m in order]
    implied = [table.implied_win_rate[m] for m in order]

    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.3 * len(order) + 1)))
    ax.barh(y, observed, color="#4878a8", label="observed win rate")
    ax.plot(implied, y, "o", color="#d1495b", ms=4, label="BT-implied")
    ax.set_yticks(y)
    ax.set_yticklabels(order, fontsize=7)
    ax.set_xlabel("win rate")
    ax.set_xlim(0, 1)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("method ranking from pairwise preferences")
    return [tsv, _save(fig, out_dir / "ranking.png")]


def render_agreement(records, out_dir, exclude_ties: bool = False) -> list[Path]:
    """Rater-by-rater agreement heatmap and matrix."""
    out_dir = Path(out_dir)
    raters, matrix = agreement_matrix(records, exclude_ties=exclude_ties)
    rows = [
        [raters[i]] + [f"{v:.4f}" if np.isfinite(v) else "" for v in matrix[i]]
        for i in range(len(raters))
    ]
    tsv = _tsv(out_dir / "agreement.tsv", ["rater"] + raters, rows)

    fig, ax = plt.subplots(figsize=(1 + 0.5 * len(raters), 1 + 0.5 * len(raters)))
    im = ax.imshow(matrix, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(raters)))
    ax.set_yticks(range(len(raters)))
    ax.set_xticklabels(raters, rotation=90, fontsize=7)
    ax.set_yticklabels(raters, fontsize=7)
    for i in range(len(raters)):
        for j in range(len(raters)):
            if np.isfinite(matrix[i, j]):
                ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center",
                        fontsize=6, color="white" if matrix[i, j] < 0.6 else "black")
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title("pairwise rater agreement")
    return [tsv, _save(fig, out_dir / "agreement.png")]


def render_stability(tables: list[StabilityTable], out_dir) -> list[Path]:
    """Rank-stability curves (mean tau vs subsample size, CI band)."""
    out_dir = Path(out_dir)
    written = []
    fig, ax = plt.subplots(figsize=(6, 4))
    for table in tables:
        rows = [
            [r.size, f"{r.mean_tau:.4f}", f"{r.ci_low:.4f}", f"{r.ci_high:.4f}"]
            for r in table.rows
        ]
        written.append(
            _tsv(out_dir / f"stability_{table.axis}.tsv",
                 ["size", "mean_tau", "ci_low", "ci_high"], rows)
        )
        sizes = [r.size for r in table.rows]
        ax.plot(sizes, [r.mean_tau for r in table.rows], "-o", ms=3, label=table.axis)
        ax.fill_between(sizes, [r.ci_low for r in table.rows],
                        [r.ci_high for r in table.rows], alpha=0.2)
    ax.axhline(0.95, color="gray", ls="--", lw=1)
    ax.set_xlabel("subsample size")
    ax.set_ylabel("Kendall tau vs full-data ranking")
    ax.set_ylim(None, 1.02)
    ax.legend(fontsize=8)
    ax.set_title("ranking stability under subsampling")
    written.append(_save(fig, out_dir / "stability.png"))
    return written


def render_battery(report: PropertyReport, out_dir) -> list[Path]:
    """Pass-rate heatmap (tests x metrics) and the cell table."""
    out_dir = Path(out_dir)
    rows = [
        [r["test"], r["metric"], f"{r['pass_rate']:.4f}",
         r["passed"], r["failed"], r["skipped"], r["verdict"]]
        for r in report.rows()
    ]
    tsv = _tsv(out_dir / "battery.tsv",
               ["test", "metric", "pass_rate", "passed", "failed", "skipped", "verdict"],
               rows)

    grid = np.array([
        [report.rate(m, t) for m in report.metrics] for t in report.tests
    ])
    fig, ax = plt.subplots(
        figsize=(1.5 + 0.45 * len(report.metrics), 1.5 + 0.3 * len(report.tests))
    )
    im = ax.imshow(grid, vmin=0.0, vmax=1.0, cmap="RdYlGn", aspect="auto")
    ax.set_xticks(range(len(report.metrics)))
    ax.set_xticklabels(report.metrics, rotation=90, fontsize=7)
    ax.set_yticks(range(len(report.tests)))
    ax.set_yticklabels(report.tests, fontsize=7)
    for i in range(len(report.tests)):
        for j in range(len(report.metrics)):
            marker = "+" if grid[i, j] >= PASS_THRESHOLD else "-"
            ax.text(j, i, marker, ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=ax, shrink=0.7, label="pass rate")
    ax.set_title(f"metric property battery (corpus {report.corpus_size}, seed {report.seed})")
    return [tsv, _save(fig, out_dir / "battery.png")]


def render_report(
    records,
    out_dir,
    seed: int = 0,
    stability_axis: str = "comparisons",
    stability_sizes=None,
    stability_iters: int = 200,
    battery: PropertyReport | None = None,
) -> list[Path]:
    """One-stop report: ranking, agreement, stability, optional battery."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = render_ranking(ranking_table(records, seed=seed), out_dir)
    raters = {r.rater for r in records}
    if len(raters) >= 2:
        written += render_agreement(records, out_dir)
    if stability_sizes is None:
        n = len(records)
        stability_sizes = sorted({max(2, round(n * f)) for f in (0.1, 0.25, 0.5, 0.75, 1.0)})
    table = bootstrap_stability(
        records, stability_axis, stability_sizes, iters=stability_iters, seed=seed
    )
    written += render_stability([table], out_dir)
    if battery is not None:
        written += render_battery(battery, out_dir)
    return written
