"""Figure rendering from result tables.

Each function takes a ResultTable and an output path, draws one figure kind,
writes it to the path (format from the suffix, e.g. .png or .svg) and returns
the matplotlib Figure.  The data series placed on the axes are exactly the
table values — no rescaling or smoothing — so the figures are pure functions
of the CSV contents.
"""

from __future__ import annotations

import re

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .table import ResultTable, Row, TableError

TOP_ERRORS_SHOWN = 200

_REFERENCE_ESTIMATORS = ("oracle", "bias")
_LEVEL_LABEL = re.compile(r"^(?:noisy|boosted)\(([^)]+)\)$")


def _save(fig, out: str):
    fig.savefig(out, bbox_inches="tight")
    return fig


def plot_convergence(table: ResultTable, out: str):
    """Log-log estimation error vs snapshot count, one line per estimator,
    with a horizontal line at the noisy-state offset if the table has one."""
    series: dict[str, list[Row]] = {}
    for r in table.rows:
        if r.N_s > 0 and r.estimator not in _REFERENCE_ESTIMATORS:
            series.setdefault(r.estimator, []).append(r)
    if not series:
        raise TableError("no convergence series rows (N_s > 0) in table")
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for name, rows in series.items():
        rows = sorted(rows, key=lambda r: r.N_s)
        ax.plot([r.N_s for r in rows], [r.value for r in rows],
                marker="o", label=name)
    for r in table.where(estimator="bias"):
        ax.axhline(r.value, color="gray", linestyle="--",
                   label="noisy-state offset")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("snapshots $N_s$")
    ax.set_ylabel("mean absolute error")
    ax.legend()
    return _save(fig, out)


def plot_sorted_errors(table: ResultTable, out: str):
    """Per-observable absolute errors sorted descending (worst first), one
    curve per estimator, truncated to the top 200; distinct error bounds are
    overlaid as horizontal lines."""
    series: dict[str, list[Row]] = {}
    for r in table.rows:
        if r.abs_error is not None and r.estimator not in _REFERENCE_ESTIMATORS:
            series.setdefault(r.estimator, []).append(r)
    if not series:
        raise TableError("no rows with an abs_error in table")
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for name, rows in series.items():
        errs = sorted((r.abs_error for r in rows), reverse=True)
        errs = errs[:TOP_ERRORS_SHOWN]
        ax.plot(np.arange(1, len(errs) + 1), errs, label=name)
        bounds = sorted({r.bound for r in rows if r.bound is not None})
        for i, b in enumerate(bounds):
            ax.axhline(b, linestyle=":", color="black",
                       label=f"{name} bound" if i == 0 else None)
    ax.set_yscale("log")
    ax.set_xlabel("observable rank (worst first)")
    ax.set_ylabel("absolute error")
    ax.legend()
    return _save(fig, out)


def plot_zne(table: ResultTable, out: str):
    """Measured expectation vs noise level per observable, with the
    zero-noise extrapolated value marked at level 0 and the exact value as a
    horizontal reference line."""
    by_obs: dict[str, list[Row]] = {}
    for r in table.rows:
        by_obs.setdefault(r.observable, []).append(r)
    panels = []
    for obs, rows in by_obs.items():
        points = []
        intercept = None
        for r in rows:
            m = _LEVEL_LABEL.match(r.estimator)
            if m:
                points.append((float(m.group(1)), r))
            elif r.estimator.startswith("zne"):
                intercept = r
        if points:
            panels.append((obs, sorted(points), intercept, rows[0]))
    if not panels:
        raise TableError("no noise-level rows (noisy(p)/boosted(p)) in table")
    fig, axes = plt.subplots(
        1, len(panels), figsize=(3.4 * len(panels), 3.2), squeeze=False
    )
    for ax, (obs, points, intercept, first) in zip(axes[0], panels):
        levels = [lvl for lvl, _ in points]
        eb = ax.errorbar(levels, [r.value for _, r in points],
                         yerr=[r.stderr or 0.0 for _, r in points],
                         marker="o", linestyle="-", label="measured")
        eb.lines[0].set_label("measured")  # errorbar labels the container
        if intercept is not None:
            eb0 = ax.errorbar([0.0], [intercept.value],
                              yerr=[intercept.stderr or 0.0],
                              marker="*", markersize=12, color="tab:red",
                              label=intercept.estimator)
            eb0.lines[0].set_label(intercept.estimator)
        if first.oracle_value is not None:
            ax.axhline(first.oracle_value, color="gray", linestyle="--",
                       label="exact")
        ax.set_title(obs)
        ax.set_xlabel("noise level")
    axes[0][0].set_ylabel("expectation value")
    axes[0][0].legend(fontsize=8)
    return _save(fig, out)


def plot_purity_map(table: ResultTable, out: str):
    """Heat maps over (estimator, subsystem): measured subsystem purity on
    the left, absolute error against the exact value on the right."""
    rows = [r for r in table.rows if r.observable.startswith("purity:")]
    if not rows:
        raise TableError("no purity rows in table")
    subsystems: list[str] = []
    estimators: list[str] = []
    for r in rows:
        label = r.observable.split(":", 1)[1]
        if label not in subsystems:
            subsystems.append(label)
        if r.estimator not in estimators:
            estimators.append(r.estimator)
    values = np.full((len(estimators), len(subsystems)), np.nan)
    errors = np.full_like(values, np.nan)
    for r in rows:
        i = estimators.index(r.estimator)
        j = subsystems.index(r.observable.split(":", 1)[1])
        values[i, j] = r.value
        if r.abs_error is not None:
            errors[i, j] = r.abs_error
    fig, (ax_v, ax_e) = plt.subplots(
        2, 1, figsize=(0.42 * len(subsystems) + 2.2, 4.6)
    )
    for ax, data, title in ((ax_v, values, "purity"),
                            (ax_e, errors, "absolute error")):
        im = ax.imshow(data, aspect="auto", cmap="viridis")
        ax.set_yticks(range(len(estimators)), estimators)
        ax.set_xticks(range(len(subsystems)), subsystems,
                      rotation=90, fontsize=7)
        ax.set_title(title)
        fig.colorbar(im, ax=ax)
    return _save(fig, out)


PLOT_KINDS = {
    "convergence": plot_convergence,
    "sorted-errors": plot_sorted_errors,
    "zne": plot_zne,
    "purity-map": plot_purity_map,
}
