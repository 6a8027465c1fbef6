"""Figures for sweep and profile results.

Rendering goes through :class:`matplotlib.figure.Figure` directly so no
pyplot state or interactive backend is involved.
"""

from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure

from .conjugate import beta_thresholds, inj_upper_bound

__all__ = ["bound_curve", "plot_sweep", "plot_profile", "plot_script"]


def bound_curve(betas, n, p):
    return np.array([inj_upper_bound(float(b), n, p).inj_upper for b in betas])


def plot_sweep(records, path, n=4, p=2):
    """White dot where a certificate was found, black where the cap was hit."""
    beta = np.array([r["beta"] if isinstance(r, dict) else r.beta for r in records])
    rho = np.array([r["rho"] if isinstance(r, dict) else r.rho for r in records])
    found = np.array([r["found"] if isinstance(r, dict) else r.found for r in records], dtype=bool)

    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.add_subplot()
    lo, hi = (beta.min(), beta.max()) if beta.size else (0.1, 1.5)
    grid = np.linspace(max(lo - 0.02, 1e-3), hi + 0.02, 400)
    ax.plot(grid, bound_curve(grid, n, p), color="0.4", lw=1.2, label=r"upper bound $\hat\imath_\beta$")
    for b in beta_thresholds():
        if grid[0] <= b <= grid[-1]:
            ax.axvline(b, color="0.8", lw=0.8, ls=":")
    ax.scatter(beta[found], rho[found], s=22, facecolors="white", edgecolors="black",
               linewidths=0.8, zorder=3, label="returned")
    ax.scatter(beta[~found], rho[~found], s=22, color="black", zorder=3, label="iteration cap")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel(r"$\rho$")
    ax.set_title(f"St({n},{p})")
    ax.legend(loc="lower right", fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


def plot_profile(rows, path, beta=0.5, n=4, p=2):
    """Iterations to return against the margin delta, log-log."""
    delta = np.array([r["delta"] for r in rows], dtype=float)
    its = np.array([r["iterations"] for r in rows], dtype=float)
    found = np.array([r["found"] for r in rows], dtype=bool)

    fig = Figure(figsize=(5.0, 4.0))
    ax = fig.add_subplot()
    order = np.argsort(delta)
    ax.loglog(delta[order], its[order], color="0.5", lw=0.8)
    ax.scatter(delta[found], its[found], color="black", s=18, zorder=3, label="returned")
    if (~found).any():
        ax.scatter(delta[~found], its[~found], marker="^", color="tab:red", s=24, zorder=3,
                   label="cap reached")
    ax.invert_xaxis()
    ax.set_xlabel(r"$\delta$  ($\rho = \hat\imath_\beta + \delta$)")
    ax.set_ylabel("iterations")
    ax.set_title(rf"St({n},{p}), $\beta$ = {beta:g}")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    return path


_SCRIPT_HEAD = '''\
"""Plot {kind} results from {csv_name} (generated by stiefel-inj)."""
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
dst = sys.argv[2] if len(sys.argv) > 2 else {png_path!r}
with open(src, newline="") as fh:
    rows = list(csv.DictReader(fh))
found = [r["found"] == "true" for r in rows]
'''

_SWEEP_BODY = '''\
beta = [float(r["beta"]) for r in rows]
rho = [float(r["rho"]) for r in rows]
curve_beta = {curve_beta!r}
curve_rho = {curve_rho!r}
fig, ax = plt.subplots(figsize=(6, 4.5))
ax.plot(curve_beta, curve_rho, color="0.4", lw=1.2)
ax.scatter([b for b, f in zip(beta, found) if f], [r for r, f in zip(rho, found) if f],
           s=22, facecolors="white", edgecolors="black", zorder=3, label="returned")
ax.scatter([b for b, f in zip(beta, found) if not f], [r for r, f in zip(rho, found) if not f],
           s=22, color="black", zorder=3, label="iteration cap")
ax.set_xlabel("beta")
ax.set_ylabel("rho")
ax.legend(loc="lower right", frameon=False)
fig.tight_layout()
fig.savefig(dst, dpi=150)
'''

_PROFILE_BODY = '''\
delta = [float(r["delta"]) for r in rows]
its = [int(r["iterations"]) for r in rows]
fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(delta, its, "o-", color="black")
ax.invert_xaxis()
ax.set_xlabel("delta")
ax.set_ylabel("iterations")
fig.tight_layout()
fig.savefig(dst, dpi=150)
'''


def plot_script(kind, csv_path, png_path, n=4, p=2, betas=None):
    """Source of a standalone matplotlib script that plots a results CSV."""
    head = _SCRIPT_HEAD.format(kind=kind, csv_name=str(csv_path).rsplit("/", 1)[-1],
                               csv_path=str(csv_path), png_path=str(png_path))
    if kind == "sweep":
        lo, hi = (min(betas), max(betas)) if betas else (0.1, 1.5)
        grid = np.linspace(max(lo - 0.02, 1e-3), hi + 0.02, 200)
        return head + _SWEEP_BODY.format(
            curve_beta=[round(float(b), 6) for b in grid],
            curve_rho=[round(float(r), 12) for r in bound_curve(grid, n, p)],
        )
    if kind == "profile":
        return head + _PROFILE_BODY
    raise ValueError(f"no plot script for {kind!r}")
