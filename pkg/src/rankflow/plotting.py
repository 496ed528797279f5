"""Figure rendering for run artifacts.

Figures complement the CSV/JSON outputs: a trajectory view (agent paths
for planar/spatial states, components against time otherwise) and a
diagnostics view built from whatever reports the run produced.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .integrate import Trajectory  # noqa: E402


def _plot_agent_paths(ax, traj: Trajectory):
    d, n = traj.d, traj.n
    states = traj.states
    for a in range(n):
        xs = states[:, 0, a]
        ys = states[:, 1, a]
        (line,) = ax.plot(xs, ys, lw=1.2, label=f"agent {a + 1}")
        ax.plot(xs[0], ys[0], "o", ms=5, color=line.get_color())
        ax.plot(xs[-1], ys[-1], "s", ms=5, color=line.get_color())
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_title("agent paths (o start, s end)" + (" [first two components]" if d > 2 else ""))
    ax.set_aspect("equal", adjustable="datalim")
    if n <= 8:
        ax.legend(fontsize=8)


def _plot_components(ax, traj: Trajectory):
    for a in range(traj.n):
        for c in range(traj.d):
            ax.plot(traj.times, traj.states[:, c, a], lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("state components")
    ax.set_title("state components over time")


def plot_trajectory(traj: Trajectory, path: str):
    fig, ax = plt.subplots(figsize=(6, 5))
    if traj.d >= 2:
        _plot_agent_paths(ax, traj)
    else:
        _plot_components(ax, traj)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _series_panels(report_dict: dict):
    """(title, times, values, style) tuples for plottable diagnostics."""
    panels = []
    diags = report_dict.get("diagnostics", {})
    if "rank" in diags:
        rep = diags["rank"]
        panels.append(("numerical rank", rep["times"], rep["series"], "step"))
    for key, label in (("subspace", "column-span projector distance"),
                       ("row_subspace", "row-span projector distance")):
        if key in diags:
            rep = diags[key]
            panels.append((label, rep["times"], rep["series"], "log"))
    if "grassmann" in diags:
        rep = diags["grassmann"]
        panels.append(("largest principal angle to initial span",
                       rep["times"], rep["angles"], "plain"))
    if "signature" in diags:
        rep = diags["signature"]
        sig = np.array(rep["series"])
        panels.append(("signature counts (p, q, s)", rep["times"], sig, "multi"))
    if "collinearity" in diags:
        rep = diags["collinearity"]["affine"]
        panels.append(("centered-rank deviation (affine collinearity)",
                       rep["times"], rep["deviations"], "log"))
    return panels


def plot_diagnostics(report_dict: dict, path: str) -> bool:
    panels = _series_panels(report_dict)
    if not panels:
        return False
    fig, axes = plt.subplots(len(panels), 1, figsize=(6.5, 2.1 * len(panels)),
                             sharex=True, squeeze=False)
    for ax, (title, times, values, style) in zip(axes[:, 0], panels):
        if style == "step":
            ax.step(times, values, where="post")
        elif style == "multi":
            for col, lbl in zip(np.asarray(values).T, ("p", "q", "s")):
                ax.step(times, col, where="post", label=lbl)
            ax.legend(fontsize=8, ncol=3)
        elif style == "log":
            vals = np.maximum(np.asarray(values, dtype=float), 1e-18)
            ax.semilogy(times, vals)
        else:
            ax.plot(times, values)
        ax.set_title(title, fontsize=9)
        ax.grid(alpha=0.3)
    axes[-1, 0].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return True


def render_figures(traj: Trajectory, report, figures_dir: str) -> list:
    """Write the standard figures for one run; returns the created paths."""
    os.makedirs(figures_dir, exist_ok=True)
    created = []
    traj_path = os.path.join(figures_dir, "trajectory.png")
    plot_trajectory(traj, traj_path)
    created.append(traj_path)
    diag_path = os.path.join(figures_dir, "diagnostics.png")
    report_dict = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    if plot_diagnostics(report_dict, diag_path):
        created.append(diag_path)
    return created
