"""Static SVG renderings of runs: overhead view, funnels and convergence."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .pi2 import IterationRecord  # noqa: E402
from .ppc import BaseLaw  # noqa: E402
from .stl import BallInside, BallOutside, Trajectory, robustness_signal  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return path


def overhead(path, traj: Trajectory, predicates: Sequence = (), title: str = "") -> Path:
    """Planar positions of every consecutive coordinate pair with ball regions."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for p in predicates:
        if isinstance(p, (BallInside, BallOutside)) and len(p.indices) == 2:
            inside = isinstance(p, BallInside)
            ax.add_patch(plt.Circle(p.center, p.radius, fill=True, alpha=0.25,
                                    color="tab:green" if inside else "tab:red"))
            ax.annotate(p.label, p.center, ha="center", va="center", fontsize=8)
    n = traj.states.shape[1]
    for r in range(n // 2):
        xy = traj.states[:, 2 * r: 2 * r + 2]
        ax.plot(xy[:, 0], xy[:, 1], lw=1.2, label=f"agent {r + 1}")
        ax.plot(*xy[0], "o", color="k", ms=3)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if n > 2:
        ax.legend(fontsize=8)
    ax.set_title(title)
    return _save(fig, path)


def funnels(path, traj: Trajectory, law: BaseLaw) -> Path:
    """Subtask robustness against its prescribed funnel."""
    M = len(law.subtasks)
    fig, axes = plt.subplots(M, 1, figsize=(6, 1.8 * M), sharex=True, squeeze=False)
    t = traj.times
    for i, (ax, sub) in enumerate(zip(axes[:, 0], law.subtasks)):
        ax.fill_between(t, sub.funnel.gamma(t), sub.funnel.rho_max, color="tab:blue", alpha=0.15)
        ax.plot(t, robustness_signal(sub.psi, traj.states, traj.dt), color="tab:blue", lw=1.2)
        ax.set_ylabel(f"rho {i + 1}")
    axes[-1, 0].set_xlabel("t [s]")
    return _save(fig, path)


def convergence(path, history: Sequence[IterationRecord], initial: Optional[tuple] = None,
                rho_min: Optional[float] = None) -> Path:
    ks = [r.k for r in history]
    cost = [r.cost for r in history]
    rho = [r.rho for r in history]
    if initial is not None:
        ks, cost, rho = [0] + ks, [initial[0]] + cost, [initial[1]] + rho
    fig, (a, b) = plt.subplots(2, 1, figsize=(6, 4), sharex=True)
    a.plot(ks, cost, lw=1.2)
    a.set_ylabel("C")
    b.plot(ks, rho, lw=1.2)
    if rho_min is not None:
        b.axhline(rho_min, ls="--", color="gray", lw=0.8)
    b.set_ylabel("rho")
    b.set_xlabel("iteration")
    return _save(fig, path)


def curves(path, series: dict, rho_min: Optional[float] = None) -> Path:
    """Mean convergence curves of several variants: ``{label: (cost, rho)}``."""
    fig, (a, b) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    for label, (c, r) in series.items():
        ks = np.arange(len(c))
        a.plot(ks, c, lw=1.0, label=label)
        b.plot(ks, r, lw=1.0, label=label)
    if rho_min is not None:
        b.axhline(rho_min, ls="--", color="gray", lw=0.8)
    a.set_ylabel("mean C")
    b.set_ylabel("mean rho")
    b.set_xlabel("iteration")
    a.legend(fontsize=7)
    return _save(fig, path)
