"""Figure rendering for the report path.

PNG files are written next to the delimited output; matplotlib runs on the
Agg backend so this works headless.
"""
from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

STATE_LABELS = (
    r"$\phi$ roll [rad]", r"$\theta$ pitch [rad]", r"$\psi$ yaw [rad]",
    r"$\gamma$ boom [rad]", r"$\lambda$ payload [rad]",
    r"$\omega_1$ [rad/s]", r"$\omega_2$ [rad/s]", r"$\omega_3$ [rad/s]",
    r"$\sigma_1$ [rad/s]", r"$\sigma_2$ [rad/s]",
)
CONTROL_LABELS = (r"$\tau_{s1}$ [N m]", r"$\tau_{s2}$ [N m]",
                  r"$\tau_{s3}$ [N m]", r"$u_{g1}$ [N m]", r"$u_{g2}$ [N m]")


def _save(fig, path, written):
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)


def render_trajectory(traj, outdir, prefix, label=None):
    """States and controls of one run; returns the written paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []

    fig, axes = plt.subplots(5, 2, figsize=(11, 12), sharex=True)
    for i, ax in enumerate(axes.flat):
        ax.plot(traj.t, traj.states[:, i], lw=0.9)
        ax.axhline(traj.target[i], color="k", lw=0.6, ls="--")
        ax.set_ylabel(STATE_LABELS[i])
        ax.grid(alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("t [s]")
    fig.suptitle(f"state response{f' ({label})' if label else ''}")
    fig.tight_layout()
    _save(fig, os.path.join(outdir, f"{prefix}_states.png"), written)

    fig, axes = plt.subplots(5, 1, figsize=(9, 10), sharex=True)
    for i, ax in enumerate(axes):
        ax.plot(traj.t, traj.controls[:, i], lw=0.9)
        ax.set_ylabel(CONTROL_LABELS[i])
        ax.grid(alpha=0.3)
    axes[-1].set_xlabel("t [s]")
    fig.suptitle(f"control effort{f' ({label})' if label else ''}")
    fig.tight_layout()
    _save(fig, os.path.join(outdir, f"{prefix}_controls.png"), written)
    return written


def render_comparison(trajectories, outdir):
    """Overlay of the methods per state plus the control-norm history."""
    os.makedirs(outdir, exist_ok=True)
    written = []

    fig, axes = plt.subplots(5, 2, figsize=(11, 12), sharex=True)
    for i, ax in enumerate(axes.flat):
        for method, traj in sorted(trajectories.items()):
            ax.plot(traj.t, traj.states[:, i], lw=0.9, label=method)
        ax.set_ylabel(STATE_LABELS[i])
        ax.grid(alpha=0.3)
    axes.flat[0].legend(loc="best", fontsize=8)
    for ax in axes[-1]:
        ax.set_xlabel("t [s]")
    fig.suptitle("initial-state response comparison")
    fig.tight_layout()
    _save(fig, os.path.join(outdir, "compare_states.png"), written)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    for method, traj in sorted(trajectories.items()):
        ax.plot(traj.t, np.linalg.norm(traj.controls, axis=1), lw=0.9, label=method)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(r"$\|u\|$ [N m]")
    ax.set_yscale("symlog", linthresh=1e-9)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.suptitle("control norm")
    fig.tight_layout()
    _save(fig, os.path.join(outdir, "compare_control_norm.png"), written)
    return written
