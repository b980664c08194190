"""Render benchmark curves and radar images to figure files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import BenchResult, group_curves

_METRICS = (
    ("p_md", "p_md_ci", "Probability of missed detection"),
    ("f1", "f1_ci", "F1 score"),
    ("fa_mean", None, "Mean false alarms per trial"),
)

_X_LABELS = {
    "snr_db": "SNR at RX [dB]",
    "spacing_d": "Target spacing d [resolution units]",
}


def render_figures(result: BenchResult, out_dir) -> list:
    """One PNG per metric, one line per (detector, window, profile) curve."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = group_curves(result.rows)
    paths = []
    for metric, ci, ylabel in _METRICS:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for (det, window, profile), rows in sorted(curves.items()):
            x = [r["x_value"] for r in rows]
            y = [r[metric] for r in rows]
            label = f"{det} / {window} / {profile}"
            (line,) = ax.plot(x, y, marker="o", markersize=3, label=label)
            if ci:
                hw = np.array([r[ci] for r in rows])
                ax.fill_between(
                    x, np.array(y) - hw, np.array(y) + hw,
                    alpha=0.15, color=line.get_color(), linewidth=0,
                )
        ax.set_xlabel(_X_LABELS.get(result.scenario.x_name, result.scenario.x_name))
        ax.set_ylabel(ylabel)
        if metric in ("p_md", "f1"):
            ax.set_ylim(-0.02, 1.02)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7, loc="best")
        fig.tight_layout()
        path = out_dir / f"{result.scenario.kind}_{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_periodogram(p, path, detections=None, db_floor: float = -60.0):
    """Radar image in dB with optional detection markers overlaid."""
    S = p.power
    peak = S.max()
    if peak <= 0:
        peak = 1.0
    img = 10.0 * np.log10(np.maximum(S / peak, 10.0 ** (db_floor / 10.0)))
    extent = [
        p.velocity_of_col(0),
        p.velocity_of_col(S.shape[1] - 1),
        p.range_of_row(0),
        p.range_of_row(S.shape[0] - 1),
    ]
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(img, origin="lower", aspect="auto", extent=extent, cmap="viridis")
    fig.colorbar(im, ax=ax, label="Power [dB rel. peak]")
    if detections:
        ax.scatter(
            [d.velocity_mps for d in detections],
            [d.range_m for d in detections],
            marker="x", color="red", s=40, linewidths=1.2, label="detections",
        )
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("Velocity [m/s]")
    ax.set_ylabel("Range [m]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
