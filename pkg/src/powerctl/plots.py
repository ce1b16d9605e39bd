"""Figure rendering for CLI reports (headless, files only).

Matplotlib is imported lazily with the Agg backend so library users
never pay the import cost and no display is ever required.  Each
renderer takes the same arrays that go into the CSV artifact and saves
a PNG next to it.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    return plt


def convergence_figure(path, iters, powers, residuals, title="Fixed-point convergence"):
    plt = _pyplot()
    powers = np.asarray(powers, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    for i in range(powers.shape[1]):
        ax1.plot(iters, powers[:, i], label=f"link {i + 1}", lw=1.5)
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("power (W)")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    positive = residuals > 0
    if np.any(positive):
        ax2.semilogy(np.asarray(iters)[positive], residuals[positive], lw=1.5)
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("residual")
    ax2.grid(alpha=0.3, which="both")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def objective_figure(path, history, title="Objective ascent"):
    plt = _pyplot()
    history = np.asarray(history, dtype=float)
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(history, lw=1.5)
    ax.set_xlabel("iteration")
    ax.set_ylabel("total utility")
    ax.grid(alpha=0.3)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def sweep_figure(path, gammas, rhos, feasible, objectives, title="Uniform target sweep"):
    plt = _pyplot()
    gammas = np.asarray(gammas, dtype=float)
    rhos = np.asarray(rhos, dtype=float)
    feas = np.asarray(feasible, dtype=bool)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(gammas, rhos, lw=1.5)
    ax1.axhline(1.0, color="crimson", ls="--", lw=1, label="rho = 1")
    if np.any(feas) and not np.all(feas):
        thresh = gammas[feas].max()
        ax1.axvline(thresh, color="gray", ls=":", lw=1,
                    label=f"last feasible {thresh:g}")
    ax1.set_xlabel("uniform SINR target")
    ax1.set_ylabel("spectral radius")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    objectives = np.asarray(objectives, dtype=float)
    ok = np.isfinite(objectives)
    if np.any(ok):
        ax2.plot(gammas[ok], objectives[ok], lw=1.5)
    ax2.set_xlabel("uniform SINR target")
    ax2.set_ylabel("total utility at minimal power")
    ax2.grid(alpha=0.3)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def power_matrix_figure(path, P, title="Per-carrier power allocation"):
    plt = _pyplot()
    P = np.asarray(P, dtype=float)
    n, F = P.shape
    fig, ax = plt.subplots(figsize=(1.2 + 0.8 * n, 3.5))
    bottom = np.zeros(n)
    x = np.arange(1, n + 1)
    for f in range(F):
        ax.bar(x, P[:, f], bottom=bottom, width=0.6, label=f"carrier {f + 1}")
        bottom += P[:, f]
    ax.set_xlabel("link")
    ax.set_ylabel("power (W)")
    ax.set_xticks(x)
    if F <= 10:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3, axis="y")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)
