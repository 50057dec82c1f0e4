"""Report rendering: CSV tables plus matplotlib figures on disk.

Covers the three report surfaces: training metrics (per-episode curves),
evaluation summaries (per-run success rates) and explanation charts (the
matplotlib twins of the deterministic SVG bundles).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .training import EvalResult


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    if window <= 1 or x.size < window:
        return x
    kernel = np.ones(window) / window
    return np.convolve(x, kernel, mode="same")


def write_metrics_csv(records: list[dict], path: str | Path) -> Path:
    path = Path(path)
    component_names = sorted(
        {name for r in records for name in r.get("per_component_reward", {})}
    )
    header = ["episode", "steps", "total_reward", "epsilon", "loss_mean"] + [
        f"reward_{n}" for n in component_names
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [r["episode"], r["steps"], r["total_reward"], r["epsilon"], r["loss_mean"]]
            row += [r.get("per_component_reward", {}).get(n, "") for n in component_names]
            writer.writerow(row)
    return path


def plot_training_metrics(records: list[dict], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    if not records:
        return paths
    episodes = np.array([r["episode"] for r in records])
    totals = np.array([r["total_reward"] for r in records], dtype=float)
    component_names = sorted({n for r in records for n in r.get("per_component_reward", {})})

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(episodes, totals, alpha=0.35, label="total")
    ax.plot(episodes, moving_average(totals, 25), label="total (avg 25)")
    for name in component_names:
        series = np.array(
            [r["per_component_reward"].get(name, 0.0) for r in records], dtype=float
        )
        ax.plot(episodes, moving_average(series, 25), label=f"{name} (avg 25)", alpha=0.8)
    ax.set_xlabel("episode")
    ax.set_ylabel("episode reward")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "reward_curve.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    losses = [(r["episode"], r["loss_mean"]) for r in records if r["loss_mean"] is not None]
    if losses:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot([e for e, _ in losses], [l for _, l in losses])
        ax.set_xlabel("episode")
        ax.set_ylabel("mean TD loss")
        ax.set_yscale("log")
        fig.tight_layout()
        path = out_dir / "loss_curve.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)

    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(episodes, [r["epsilon"] for r in records])
    ax.set_xlabel("episode")
    ax.set_ylabel("epsilon")
    fig.tight_layout()
    path = out_dir / "epsilon_curve.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)
    return paths


def write_eval_csv(result: EvalResult, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "correct_choice_rate"])
        for i, rate in enumerate(result.rates):
            writer.writerow([i, rate])
        writer.writerow(["mean", result.mean])
        writer.writerow(["std", result.std])
    return path


def plot_eval_rates(result: EvalResult, path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    runs = np.arange(len(result.rates))
    ax.bar(runs, result.rates, color="#5471ab")
    ax.axhline(result.mean, color="#e07b39", linestyle="--", label=f"mean {result.mean:.3f}")
    ax.set_xlabel("evaluation run")
    ax.set_ylabel("correct-choice rate")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_candidates_csv(bundle: dict, path: str | Path) -> Path:
    path = Path(path)
    names = bundle["component_names"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["candidate", "label", "u", "v"] + names + ["overall"])
        for c in bundle["candidates"] + [bundle["selected"]]:
            writer.writerow(
                [c["name"], c["label"], c["pixel"][0], c["pixel"][1]]
                + [c["values"][n] for n in names]
                + [c["overall"]]
            )
    return path


def _grouped_bars(ax, groups: list[dict], series: list[str], colors: list[str]):
    n_series = len(series)
    width = 0.8 / max(n_series, 1)
    xs = np.arange(len(groups))
    for si, name in enumerate(series):
        values = [
            next((b["value"] for b in g["bars"] if b["label"] == name), 0.0) for g in groups
        ]
        ax.bar(xs + (si - (n_series - 1) / 2) * width, values, width, label=name,
               color=colors[si % len(colors)])
    ax.set_xticks(xs)
    ax.set_xticklabels([g["label"] for g in groups], fontsize=8)
    ax.axhline(0.0, color="#222222", linewidth=0.8)
    ax.legend(fontsize=8)


_MPL_COLORS = ["#e07b39", "#5471ab", "#3b9e6d", "#b85fa0", "#c9b037", "#707070"]


def plot_candidate_chart(bundle: dict, path: str | Path) -> Path:
    path = Path(path)
    chart = bundle["chart"]
    series = bundle["component_names"] + ["overall"]
    fig, ax = plt.subplots(figsize=(7, 4))
    _grouped_bars(ax, chart["candidate_groups"], series, _MPL_COLORS)
    ax.set_ylabel("Q-value")
    ax.set_title("Candidate Q-values per component")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_rdx_chart(bundle: dict, path: str | Path) -> Path:
    path = Path(path)
    chart = bundle["chart"]
    fig, ax = plt.subplots(figsize=(7, 4))
    _grouped_bars(ax, chart["rdx_groups"], list(bundle["component_names"]), _MPL_COLORS)
    ax.set_ylabel("Q-value difference")
    ax.set_title("Pairwise component differences (RDX)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
