"""Matplotlib figure rendering for evaluation and bounds reports.

Figures are written next to the machine-readable output so a report
directory is self-contained.  Everything renders through the Agg
backend; no display is ever required.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .bounds import BoundsReport  # noqa: E402
from .evaluation import MAX_SPAN_BUCKET, Metrics  # noqa: E402


def relation_f1_figure(metrics: Metrics, path) -> None:
    labels = list(metrics.per_relation_f1)
    f1 = [metrics.per_relation_f1[r].f1 for r in labels]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.35 * len(labels))))
    ax.barh(range(len(labels)), f1, color="#4878a8")
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlim(0, 1.0)
    ax.set_xlabel("F1")
    ax.set_title("Per-relation F1 (sorted by support)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def span_accuracy_figure(metrics: Metrics, path) -> None:
    buckets = sorted(metrics.per_span_accuracy)
    values = [metrics.per_span_accuracy[b] for b in buckets]
    names = [f">={MAX_SPAN_BUCKET}" if b == MAX_SPAN_BUCKET else str(b) for b in buckets]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.bar(names, values, color="#6aa06a")
    ax.set_ylim(0, 1.0)
    ax.set_xlabel("head distance")
    ax.set_ylabel("relation accuracy")
    ax.set_title("Relation accuracy by head distance")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def breakdown_figure(metrics: Metrics, path) -> None:
    names = ["UAS", "intra UAS", "inter UAS", "LAS gold", "LAS pred"]
    values = [metrics.uas, metrics.intra_uas, metrics.inter_uas,
              metrics.las_gold, metrics.las_pred]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.bar(names, values, color="#a8784b")
    ax.set_ylim(0, 1.0)
    for i, v in enumerate(values):
        ax.text(i, v + 0.02, f"{v:.3f}", ha="center", fontsize=8)
    ax.set_title("Attachment scores")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_metrics_figures(metrics: Metrics, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        outdir / "relation_f1.png": relation_f1_figure,
        outdir / "span_accuracy.png": span_accuracy_figure,
        outdir / "breakdown.png": breakdown_figure,
    }
    for path, render in paths.items():
        render(metrics, path)
    return list(paths)


def bounds_figure(reports: list[BoundsReport], path) -> None:
    """Restricted-to-full tree ratio against the bound, per swept shape."""
    reports = sorted(reports, key=lambda r: (r.shape.total, r.shape.sentence_lengths))
    xs = range(len(reports))
    ratio = [r.tprime_count / r.t_count for r in reports]
    bound = [r.bound / r.t_count for r in reports]
    fig, ax = plt.subplots(figsize=(8, 3.6))
    ax.plot(xs, bound, ".", color="#c05a5a", label="bound / |T|", markersize=4)
    ax.plot(xs, ratio, ".", color="#4878a8", label="|T'| / |T|", markersize=4)
    ax.set_xlabel("shape (ordered by total size)")
    ax.set_ylabel("fraction of full search space")
    theorem = reports[0].theorem if reports else "?"
    ax.set_title(f"Sent-First search-space reduction (inequality {theorem})")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
