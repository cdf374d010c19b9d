"""Static report figures for a flow run (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _close(points: np.ndarray) -> np.ndarray:
    return np.vstack([points, points[:1]])


def plot_curves(frames, path: str | Path, count: int = 5) -> Path:
    """xy- and xz-projections of a few frames from first to last."""
    idx = np.unique(np.linspace(0, len(frames) - 1, min(count, len(frames))).astype(int))
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
    cmap = plt.get_cmap("viridis")
    for n, i in enumerate(idx):
        t, pts, _ = frames[i]
        p = _close(np.asarray(pts))
        col = cmap(n / max(len(idx) - 1, 1))
        axes[0].plot(p[:, 0], p[:, 1], color=col, lw=1.2, label=f"t={t:.3g}")
        if p.shape[1] > 2:
            axes[1].plot(p[:, 0], p[:, 2], color=col, lw=1.2)
    for ax, lab in zip(axes, ("y", "z")):
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x")
        ax.set_ylabel(lab)
    axes[0].legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def plot_history(diag: dict[str, np.ndarray], path: str | Path) -> Path:
    """Energy, residual, higher energies and bi-Lipschitz constant against flow time."""
    t = diag["t"]
    tt = np.where(t > 0, t, np.nan)
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    ax = axes[0, 0]
    ax.plot(tt, diag["total_energy"], label="E + lambda L")
    ax.plot(tt, diag["energy_alpha"], label="E^alpha")
    ax.set_xscale("log")
    ax.set_ylabel("energy")
    ax.legend(fontsize=8)
    ax = axes[0, 1]
    ax.loglog(tt, diag["residual"])
    ax.set_ylabel("||V||")
    ax = axes[1, 0]
    for k in range(3):
        ax.semilogy(tt, diag[f"E{k}"], label=f"E^{k}")
    ax.set_xscale("log")
    ax.set_ylabel("higher energies")
    ax.legend(fontsize=8)
    ax = axes[1, 1]
    ax.semilogx(tt, diag["bilipschitz"], label="bi-Lipschitz")
    ax.semilogx(tt, diag["coercivity"], label="coercivity ratio")
    ax.legend(fontsize=8)
    for a in axes.flat:
        a.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def plot_kernel(x: np.ndarray, g: np.ndarray, path: str | Path, label: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, g, lw=1.2, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("G_t(x)")
    if label:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)
