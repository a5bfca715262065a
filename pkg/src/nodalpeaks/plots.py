"""Figure rendering from run artifacts.

Reads the CSV/JSON files a finished (or partial) run left behind and
writes PNG figures next to them under <out_dir>/plots. Rendering never
recomputes anything: a missing artifact just means the corresponding
figure is skipped.
"""

import json
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InvalidParam


def _load_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def plot_landscape(point_dir: str, entry: dict, out_path: str) -> bool:
    path = os.path.join(point_dir, "landscape.csv")
    if not os.path.exists(path):
        return False
    header, data = _load_csv(path)
    r, total = data[:, 0], data[:, 1]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(r, total, "k-", lw=1.5, label="predicted total")
    ax.axvline(entry["predicted_radius"], color="tab:blue", ls="--",
               lw=1, label="predicted radius")
    if entry.get("model_minimizer_r") is not None:
        ax.axvline(entry["model_minimizer_r"], color="tab:red", ls=":",
                   lw=1, label="model minimizer")
    if entry.get("measured_minimizer_r") is not None:
        mpath = os.path.join(point_dir, "landscape_measured.csv")
        if os.path.exists(mpath):
            _, mdata = _load_csv(mpath)
            ax2 = ax.twinx()
            ax2.plot(mdata[:, 0], mdata[:, 1], "o-", color="tab:green",
                     ms=3, lw=0.8, alpha=0.7)
            ax2.set_ylabel("measured energy", color="tab:green")
    ax.set_xlabel("ring radius")
    ax.set_ylabel("reduced energy")
    ax.set_title(f"{entry['mode']} landscape, eps={entry['eps']:g}, "
                 f"k={entry['k']}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)
    return True


def plot_residual_history(point_dir: str, entry: dict,
                          out_path: str) -> bool:
    path = os.path.join(point_dir, "report.json")
    if not os.path.exists(path):
        return False
    with open(path) as fh:
        report = json.load(fh)
    hist = report.get("residual_history", [])
    if not hist:
        return False
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(range(len(hist)), hist, "o-", ms=4)
    ax.set_xlabel("Newton iteration")
    ax.set_ylabel("residual sup norm")
    ax.set_title(f"{entry['mode']} eps={entry['eps']:g}: "
                 f"{entry['solve_status']}")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)
    return True


def plot_slice(point_dir: str, entry: dict, out_path: str) -> bool:
    path = os.path.join(point_dir, "slice.csv")
    if not os.path.exists(path):
        return False
    _, data = _load_csv(path)
    n = int(round(math.sqrt(data.shape[0])))
    if n * n != data.shape[0]:
        raise InvalidParam(f"slice is not square: {data.shape[0]} rows")
    x = data[:, 0].reshape(n, n)
    y = data[:, 1].reshape(n, n)
    u = data[:, 2].reshape(n, n)
    v = data[:, 3].reshape(n, n)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
    for ax, comp, name in ((axes[0], u, "u"), (axes[1], v, "v")):
        lim = max(abs(comp.max()), abs(comp.min()), 1e-30)
        pm = ax.pcolormesh(x, y, comp, cmap="RdBu_r", vmin=-lim,
                           vmax=lim, shading="auto")
        fig.colorbar(pm, ax=ax, shrink=0.85)
        ax.set_title(f"{name}, x3 = 0")
        ax.set_xlabel("x1")
        ax.set_aspect("equal")
    axes[0].set_ylabel("x2")
    fig.suptitle(f"{entry['mode']} eps={entry['eps']:g}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)
    return True


def render_plots(out_dir: str) -> list[str]:
    """Render every figure the artifacts in out_dir support; returns
    the written paths."""
    spath = os.path.join(out_dir, "summary.json")
    if not os.path.exists(spath):
        raise InvalidParam(f"no summary.json under {out_dir}")
    with open(spath) as fh:
        summary = json.load(fh)
    plots_dir = os.path.join(out_dir, "plots")
    os.makedirs(plots_dir, exist_ok=True)
    written = []
    for entry in summary["points"]:
        tag = f"{entry['mode']}_eps{entry['eps']:g}"
        pdir = os.path.join(out_dir, tag)
        for fn, name in ((plot_landscape, "landscape"),
                         (plot_residual_history, "residuals"),
                         (plot_slice, "slice")):
            out_path = os.path.join(plots_dir, f"{tag}_{name}.png")
            if fn(pdir, entry, out_path):
                written.append(out_path)
    return written
