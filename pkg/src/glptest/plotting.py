"""Matplotlib figures written next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def kernel_heatmap(w, y, path, title="LP graph kernel"):
    """Heatmap of the kernel with samples ordered by group."""
    order = np.argsort(np.asarray(y), kind="stable")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 3.6))
        im = ax.imshow(np.asarray(w)[np.ix_(order, order)], cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax, shrink=0.8)
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
        return _save(fig, path)


def spectrum_plot(embedding, y, path):
    """Nontrivial spectrum plus the retained eigenvectors colored by true group."""
    y = np.asarray(y)
    u = embedding.u
    with plt.rc_context(STYLE):
        ncols = 1 + min(u.shape[1], 2)
        fig, axes = plt.subplots(1, ncols, figsize=(3.2 * ncols, 2.8))
        axes = np.atleast_1d(axes)
        spec = embedding.spectrum if embedding.spectrum is not None else embedding.eigenvalues
        top = min(len(spec), 20)
        axes[0].plot(np.arange(2, top + 2), spec[:top], "o", ms=3, color="0.4")
        k1 = len(embedding.eigenvalues)
        axes[0].plot(np.arange(2, k1 + 2), spec[:k1], "D", ms=5, color="tab:red")
        axes[0].set_xlabel("index")
        axes[0].set_ylabel("eigenvalue")
        for j in range(ncols - 1):
            ax = axes[j + 1]
            for g in np.unique(y):
                idx = np.flatnonzero(y == g)
                ax.plot(idx + 1, u[idx, j], ".", ms=4, label=str(g))
            ax.set_xlabel("sample")
            ax.set_ylabel(f"u{j + 2}")
        axes[-1].legend(title="group", frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def chart_plot(chart, path):
    rows = [r for r in chart.rows if not r.skipped]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.6))
        orders = [r.order for r in rows]
        stats = [r.statistic for r in rows]
        colors = ["tab:red" if r.significant else "0.6" for r in rows]
        ax.bar(orders, stats, color=colors)
        for r in rows:
            ax.annotate(
                f"p={r.p_asymptotic:.2g}", (r.order, r.statistic),
                ha="center", va="bottom", fontsize=7,
            )
        ax.set_xticks(orders)
        ax.set_xlabel("LP component")
        ax.set_ylabel("GLP statistic")
        return _save(fig, path)


def power_plot(reports, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.6))
        dims = np.array([r.scenario.d for r in reports])
        power = np.array([r.power for r in reports])
        err = np.array([r.mc_stderr for r in reports])
        ax.errorbar(dims, power, yerr=2 * err, marker="o", ms=3, capsize=2)
        if len(dims) > 1 and dims.min() > 0 and dims.max() / dims.min() >= 8:
            ax.set_xscale("log", base=2)
        ax.set_ylim(-0.02, 1.02)
        ax.set_xlabel("dimension d")
        ax.set_ylabel("power")
        if reports:
            ax.set_title(f"{reports[0].scenario.name} ({reports[0].order_or_chart})")
        return _save(fig, path)


def calibration_plot(results, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(3.0, 1.0 + 0.8 * len(results)), 2.8))
        ax.boxplot([r.differences for r in results])
        ax.set_xticks(range(1, len(results) + 1))
        ax.set_xticklabels([f"n={r.n1}+{r.n2}\nd={r.d}" for r in results])
        ax.axhline(0.0, color="0.5", lw=0.8)
        ax.set_ylabel("p(asymptotic) - p(permutation)")
        return _save(fig, path)
