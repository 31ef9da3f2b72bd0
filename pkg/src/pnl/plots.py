"""Figure rendering for the CLI report path.

Renders box plots of benchmark records (errors or runtimes against the
number of lines) to image files next to the delimited output.  Whiskers
span 10x the interquartile range, matching the summary statistics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _group_cells(records):
    """records -> {(method, sigma_p, fraction): {n: [values...]}} skeleton."""
    cells = {}
    for r in records:
        key = (r.method, r.sigma_p, r.outlier_fraction)
        cells.setdefault(key, {}).setdefault(r.n, []).append(r)
    return cells


def _boxplot_panel(ax, per_n, value_of, title, ylabel):
    ns = sorted(per_n)
    data = []
    for n in ns:
        values = [value_of(r) for r in per_n[n] if not r.failed or value_of is _runtime]
        data.append([v for v in values if v == v])  # drop NaNs from failures
    ax.boxplot(data, tick_labels=[str(n) for n in ns], whis=10.0)
    if any(len(d) and min(d) > 0 for d in data):
        ax.set_yscale("log")
    ax.set_xlabel("number of lines")
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=9)
    ax.grid(True, which="both", alpha=0.3)


def _theta(record):
    return record.error.delta_theta_deg if record.error else float("nan")


def _tau(record):
    return record.error.delta_tau_m if record.error else float("nan")


def _runtime(record):
    return record.runtime_ms


def _render(records, value_of, ylabel, path):
    cells = _group_cells(records)
    keys = sorted(cells)
    fig, axes = plt.subplots(
        1, len(keys), figsize=(4.0 * len(keys), 3.2), squeeze=False
    )
    for ax, key in zip(axes[0], keys):
        method, sigma_p, fraction = key
        title = f"{method}, sigma_p={sigma_p:g} px"
        if fraction:
            title += f", outliers={fraction:.0%}"
        _boxplot_panel(ax, cells[key], value_of, title, ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_error_figures(records, stem):
    """Render orientation- and position-error box plots; returns the paths."""
    return [
        _render(records, _theta, "orientation error (deg)",
                f"{stem}_orientation_error.png"),
        _render(records, _tau, "position error (m)",
                f"{stem}_position_error.png"),
    ]


def save_runtime_figure(records, stem):
    """Render the runtime box plot; returns the path."""
    return _render(records, _runtime, "runtime (ms)", f"{stem}_runtime.png")
