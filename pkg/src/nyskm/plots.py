"""Figure rendering for sweep output: error and accuracy versus m/n."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_plot_data(dat_path, out_dir) -> Path:
    """Render one ``<dataset>_<strategy>.dat`` table to a two-panel PNG."""
    dat_path = Path(dat_path)
    table = np.loadtxt(dat_path, skiprows=1, ndmin=2)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / (dat_path.stem + ".png")

    ratio = table[:, 0] * 100.0
    fig, (ax_err, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_err.errorbar(ratio, table[:, 1], yerr=table[:, 2], marker="o",
                    capsize=3, label="GSA")
    ax_err.errorbar(ratio, table[:, 3], yerr=table[:, 4], marker="s",
                    capsize=3, label="LLA")
    ax_err.set_xlabel("landmark ratio m/n (%)")
    ax_err.set_ylabel("approximation error")
    ax_err.set_yscale("log")
    ax_err.legend()
    ax_acc.errorbar(ratio, table[:, 5], yerr=table[:, 6], marker="o",
                    capsize=3, label="GSA")
    ax_acc.errorbar(ratio, table[:, 7], yerr=table[:, 8], marker="s",
                    capsize=3, label="LLA")
    ax_acc.set_xlabel("landmark ratio m/n (%)")
    ax_acc.set_ylabel("test accuracy")
    ax_acc.legend()
    fig.suptitle(dat_path.stem.replace("_", " "))
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def render_all(dat_paths, out_dir) -> list[Path]:
    return [render_plot_data(p, out_dir) for p in dat_paths]
