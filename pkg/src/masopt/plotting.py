"""Static SVG rendering of loss curves and 2-D parameter trajectories."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_traces"]


def plot_traces(traces: dict, out_path, log_loss: bool = False) -> None:
    """Write one SVG with a loss-vs-step panel, plus a (p0, p1) trajectory
    panel when every trace carries at least two parameter columns."""
    if not traces:
        raise ValueError("no traces to plot")
    with_params = all(
        t and t[0].params is not None and len(t[0].params) >= 2 for t in traces.values()
    )
    if with_params:
        fig, (ax_loss, ax_traj) = plt.subplots(1, 2, figsize=(11, 4.5))
    else:
        fig, ax_loss = plt.subplots(figsize=(6.5, 4.5))
        ax_traj = None

    for label, records in traces.items():
        ax_loss.plot([r.step for r in records], [r.loss for r in records], label=label)
    ax_loss.set_xlabel("step")
    ax_loss.set_ylabel("loss")
    if log_loss:
        ax_loss.set_yscale("log")
    ax_loss.legend()
    ax_loss.set_title("loss per step")

    if ax_traj is not None:
        for label, records in traces.items():
            xs = [r.params[0] for r in records]
            ys = [r.params[1] for r in records]
            (line,) = ax_traj.plot(xs, ys, label=label)
            ax_traj.plot(xs[0], ys[0], "o", color=line.get_color())
        ax_traj.set_xlabel("p0")
        ax_traj.set_ylabel("p1")
        ax_traj.legend()
        ax_traj.set_title("parameter trajectory")

    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
