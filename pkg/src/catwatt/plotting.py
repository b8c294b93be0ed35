"""Optional figures rendered next to the CSV output (``--plot``)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def heatmap_figure(path: str | Path, eps_hz: np.ndarray, kappa: np.ndarray, energy: np.ndarray,
                   fidelity: np.ndarray, title: str = "") -> None:
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2), constrained_layout=True)
    x = np.asarray(eps_hz) / 1e6
    for ax, z, label in ((axes[0], np.log10(energy), "log10 energy (J)"), (axes[1], fidelity, "total fidelity")):
        m = ax.pcolormesh(x, kappa, z, shading="auto")
        ax.set_yscale("log")
        ax.set_xlabel("epsilon_z / 2pi (MHz)")
        ax.set_ylabel("kappa2 / kappa1")
        fig.colorbar(m, ax=ax, label=label)
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def curves_figure(path: str | Path, series: dict[str, Sequence[tuple[float, float]]], ylabel: str,
                  logy: bool = True, title: str = "", fits: dict[str, np.ndarray] | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.4), constrained_layout=True)
    for name, pts in series.items():
        xs, ys = zip(*pts) if pts else ((), ())
        ax.plot(xs, ys, "o-", ms=3, label=name)
    for name, (xs, ys) in (fits or {}).items():
        ax.plot(xs, ys, "--", lw=1, label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("qubits")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=120)
    plt.close(fig)
