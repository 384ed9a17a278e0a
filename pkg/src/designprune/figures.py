"""Matplotlib renderings of solver traces and bound curves.

Everything draws to files through the Agg backend so the CLI works on
headless machines; each function takes precomputed data (trace rows or
bench row dicts) plus an output path and returns the path it wrote.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = [
    "plot_trace",
    "plot_active_staircase",
    "plot_bound_profile",
    "plot_bound_sweep",
    "plot_tau_star",
    "plot_bound_vs_p",
]


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_trace(trace, path):
    """Criterion value and certificate gap per iteration, stacked."""
    ks = [row.k for row in trace]
    phis = [row.phi for row in trace]
    rels = [row.eps / row.t for row in trace]
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax1.plot(ks, phis, color="tab:blue")
    ax1.set_ylabel("phi")
    ax1.grid(alpha=0.3)
    pruned_ks = [row.k for row in trace if row.pruned]
    for k in pruned_ks:
        ax1.axvline(k, color="tab:red", alpha=0.2, lw=0.8)
    ax2.semilogy(ks, [max(r, 1e-300) for r in rels], color="tab:orange")
    ax2.set_ylabel("eps / t")
    ax2.set_xlabel("iteration")
    ax2.grid(alpha=0.3)
    fig.suptitle("solver trace (red lines mark deletions)" if pruned_ks else "solver trace")
    return _finish(fig, path)


def plot_active_staircase(trace, path):
    """Active candidate count per iteration; deletion makes it a
    non-increasing staircase."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.step(
        [row.k for row in trace],
        [row.n_active for row in trace],
        where="post",
        color="tab:green",
    )
    ax.set_xlabel("iteration")
    ax.set_ylabel("active candidates")
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def plot_bound_profile(d, C, keep, path, threshold_label="C"):
    """Per-candidate variance values against a horizontal threshold,
    the deletion bound C by default."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    idx = range(len(d))
    colors = ["tab:blue" if k else "tab:red" for k in keep]
    ax.scatter(idx, d, s=6, c=colors)
    ax.axhline(C, color="black", lw=1, ls="--",
               label=f"{threshold_label} = {C:.6g}")
    ax.set_xlabel("candidate index")
    ax.set_ylabel("d(x)")
    ax.legend()
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def plot_bound_sweep(rows, path):
    """Deletion threshold along the xi_tau family, one curve per
    t_star regime, with the trace t(tau) for scale."""
    taus = [r["tau"] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    if rows and rows[0]["C_known"] is not None:
        ax.plot(taus, [r["C_known"] for r in rows], "o-", ms=3, label="C, t* known")
    ax.plot(taus, [r["C_unknown"] for r in rows], "s-", ms=3, label="C, t* unknown")
    ax.plot(taus, [r["t"] for r in rows], ":", color="gray", label="t(tau)")
    ax.set_xlabel("tau")
    ax.set_ylabel("deletion threshold")
    ax.legend()
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def plot_tau_star(rows, path):
    """Optimal tau of the xi_tau family across criterion exponents."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot([r["p"] for r in rows], [r["tau_star"] for r in rows], "o-", ms=3)
    ax.set_xlabel("p")
    ax.set_ylabel("tau*")
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def plot_bound_vs_p(rows, path):
    """Both-regime thresholds at matched optimality gap across p."""
    ps = [r["p"] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ps, [r["C_known"] for r in rows], "o-", ms=3, label="C, t* known")
    ax.plot(ps, [r["C_unknown"] for r in rows], "s-", ms=3, label="C, t* unknown")
    ax.set_xlabel("p")
    ax.set_ylabel("deletion threshold")
    ax.legend()
    ax.grid(alpha=0.3)
    return _finish(fig, path)
