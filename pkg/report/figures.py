"""Figure builders: every number plotted comes straight from the CSV columns.

Time-series figures draw the across-run mean with a +/- one-std band from
``timeseries.csv``; comparison figures draw aggregate values as grouped bars,
one group per run directory (the input directory alone when it has no run
subdirectories).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from loaders import load_csv, load_run_dir, sibling_run_dirs  # noqa: E402

# figure name -> (timeseries variable, axis label)
TIMESERIES_FIGURES = {
    "attitude-nse": ("att_deg", "attitude error [deg]"),
    "vertical-nse": ("h_m", "vertical position error [m]"),
    "velocity-nse": ("vn_mps", "north velocity error [m/s]"),
    "horizontal-drift": ("hor_m", "horizontal position error [m]"),
}

COMPARE_FIGURES = {
    "variant-compare": ("att_deg", "attitude error, mean of run means [deg]"),
    "grade-compare": ("hor_m", "horizontal error, mean of run means [m]"),
}

FIGURE_NAMES = tuple(TIMESERIES_FIGURES) + tuple(COMPARE_FIGURES)

def _save(fig, out_path):
    # strip environment-dependent metadata so identical inputs give
    # identical bytes
    path = Path(out_path)
    if path.suffix == ".svg":
        meta = {"Date": None}
    else:
        meta = {"Software": "gdnav-report"}
    fig.savefig(path, dpi=110, metadata=meta)


def render_timeseries(in_dir, name, out_path):
    var, ylabel = TIMESERIES_FIGURES[name]
    _, ts = load_run_dir(in_dir)
    t = ts.floats("t")
    mean = ts.floats(f"{var}_mean")
    std = ts.floats(f"{var}_std")
    fig, ax = plt.subplots(figsize=(9.0, 3.2))
    ax.plot(t, mean, lw=1.6, label="mean over runs")
    ax.plot(t, mean - std, lw=0.6, ls="--", color="C0")
    ax.plot(t, mean + std, lw=0.6, ls="--", color="C0")
    ax.fill_between(t, mean - std, mean + std, alpha=0.18, color="C0",
                    label="+/- std")
    ax.set_xlabel("t [s]")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)
    plt.close(fig)
    return mean, std


def render_compare(in_dir, name, out_path):
    var, ylabel = COMPARE_FIGURES[name]
    dirs = sibling_run_dirs(in_dir) or [Path(in_dir)]
    labels, values = [], []
    for d in dirs:
        agg = load_csv(d / "aggregate.csv", required=("variable", "over_runs",
                                                      "traj_mean"))
        row = agg.select(variable=var, over_runs="mean")
        if not row.rows:
            continue
        labels.append(d.name)
        values.append(float(row.column("traj_mean")[0]))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels) + 2), 3.2))
    ax.bar(range(len(values)), values, color="C0", width=0.6)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    _save(fig, out_path)
    plt.close(fig)
    return labels, values


def render_figure(in_dir, name, out_dir, fmt="png"):
    out_path = Path(out_dir) / f"{name}.{fmt}"
    if name in TIMESERIES_FIGURES:
        render_timeseries(in_dir, name, out_path)
    elif name in COMPARE_FIGURES:
        render_compare(in_dir, name, out_path)
    else:
        raise ValueError(f"unknown figure {name!r}; available: "
                         f"{', '.join(FIGURE_NAMES)}")
    return out_path
