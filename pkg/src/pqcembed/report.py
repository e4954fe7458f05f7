"""Run artifacts: trace CSV, re-run manifest, and rendered figures.

Trace files are written with repr-roundtrip floats so that reruns of the
same seeded configuration are byte-identical. Figures are rendered next to
the delimited output with matplotlib's Agg backend.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .training import TrainingTrace

TRACE_HEADER = "iteration,cost,mse,train_acc,test_acc"


def write_trace_csv(trace: TrainingTrace, path: Path) -> Path:
    path = Path(path)
    lines = [TRACE_HEADER]
    for it, cost, mse, tr_acc, te_acc in trace.rows():
        lines.append(f"{it},{cost!r},{mse!r},{tr_acc!r},{te_acc!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_manifest(payload: dict, path: Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def save_training_figures(trace: TrainingTrace, outdir: Path, title: str) -> list[Path]:
    """Cost/MSE curves and accuracy curves as PNG files."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(trace.iterations, trace.cost, label="cost", color="tab:blue")
    ax.plot(trace.iterations, trace.mse, label="mean square error",
            color="tab:orange", linestyle="--")
    ax.set_xlabel("iteration")
    ax.set_ylabel("value")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = outdir / "cost_mse.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(trace.iterations, trace.train_accuracy, label="train accuracy",
            color="tab:green", linestyle="--")
    ax.plot(trace.iterations, trace.test_accuracy, label="test accuracy",
            color="tab:red")
    ax.set_xlabel("iteration")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = outdir / "accuracy.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def save_sweep_figure(traces: dict[float, TrainingTrace], outdir: Path, title: str) -> Path:
    """Overlaid cost curves for each depolarization strength."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for lam, trace in sorted(traces.items(), reverse=True):
        ax.plot(trace.iterations, trace.cost, label=f"lambda = {lam}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = outdir / "noise_comparison.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_sweep_csv(rows: list[tuple[float, float, float]], path: Path) -> Path:
    """Per-lambda summary: (lambda, final cost, final test accuracy)."""
    path = Path(path)
    lines = ["lambda,final_cost,final_test_acc"]
    for lam, cost, acc in rows:
        lines.append(f"{lam!r},{cost!r},{acc!r}")
    path.write_text("\n".join(lines) + "\n")
    return path
