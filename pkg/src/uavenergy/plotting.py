"""Figure rendering for the CLI report paths.

Uses the Agg backend so figures render headlessly to files next to the CSV
outputs.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_trajectory(result, path) -> None:
    """Four-panel trajectory figure: position, velocity, attitude, energy."""
    t = result.times
    states = result.states
    outputs = result.outputs

    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)

    ax = axes[0, 0]
    for i, label in enumerate(("x", "y", "z")):
        ax.plot(t, states[:, i], label=label)
    ax.set_ylabel("position [m]")
    ax.legend(loc="best")

    ax = axes[0, 1]
    for i, label in enumerate(("vx", "vy", "vz")):
        ax.plot(t, states[:, 3 + i], label=label)
    ax.set_ylabel("velocity [m/s]")
    ax.legend(loc="best")

    ax = axes[1, 0]
    for i, label in enumerate(("phi", "theta", "psi")):
        ax.plot(t, np.degrees(states[:, 6 + i]), label=label)
    ax.set_ylabel("attitude [deg]")
    ax.set_xlabel("t [s]")
    ax.legend(loc="best")

    ax = axes[1, 1]
    ax.plot(t, outputs[:, 0], label="soc")
    ax.set_ylabel("state of charge [-]")
    ax.set_xlabel("t [s]")
    twin = ax.twinx()
    twin.plot(t, outputs[:, 1], color="tab:orange", label="u_b")
    twin.plot(t, outputs[:, 2], color="tab:green", label="i_b")
    twin.set_ylabel("u_b [V] / i_b [A]")
    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = twin.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, loc="best")

    fig.suptitle(f"{result.mode} rollout, dt={result.dt} s")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_validation(log, reports, path) -> None:
    """Measured vs estimated SoC, voltage, and current for each model."""
    fig, axes = plt.subplots(3, 1, figsize=(9, 8), sharex=True)
    names = ("state of charge [-]", "voltage [V]", "current [A]")
    measured = (log.soc, log.voltage, log.current)

    for i, ax in enumerate(axes):
        ax.plot(log.t, measured[i], "k-", lw=1.5, label="measured")
        for rep in reports:
            ax.plot(rep.t, rep.estimate[:, i], "--", lw=1.0, label=rep.model)
        ax.set_ylabel(names[i])
    axes[-1].set_xlabel("t [s]")
    axes[0].legend(loc="best", ncol=2)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
