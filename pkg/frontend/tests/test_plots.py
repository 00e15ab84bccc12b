import matplotlib.pyplot as plt
import numpy as np
import pytest

from conftest import write_rows
from plotkit.plots import (
    TOP_ERRORS_SHOWN,
    plot_convergence,
    plot_purity_map,
    plot_sorted_errors,
    plot_zne,
)
from plotkit.table import ResultTable, TableError


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close("all")


def lines_by_label(ax):
    return {ln.get_label(): ln for ln in ax.get_lines() if not
            ln.get_label().startswith("_")}


class TestConvergence:
    def test_series_equal_csv_values(self, tables, tmp_path):
        t = tables["energy"]
        fig = plot_convergence(t, str(tmp_path / "c.png"))
        assert (tmp_path / "c.png").exists()
        ax = fig.axes[0]
        lines = lines_by_label(ax)
        for name in ("pec", "conventional"):
            rows = sorted(t.where(estimator=name), key=lambda r: r.N_s)
            np.testing.assert_array_equal(
                lines[name].get_xdata(), [r.N_s for r in rows]
            )
            np.testing.assert_array_equal(
                lines[name].get_ydata(), [r.value for r in rows]
            )

    def test_plateau_line_equals_bias_row(self, tables, tmp_path):
        t = tables["energy"]
        fig = plot_convergence(t, str(tmp_path / "c.png"))
        bias = t.where(estimator="bias")[0].value
        hlines = [ln.get_ydata()[0] for ln in fig.axes[0].get_lines()
                  if ln.get_label() == "noisy-state offset"]
        assert hlines == [bias]

    def test_svg_output(self, tables, tmp_path):
        plot_convergence(tables["energy"], str(tmp_path / "c.svg"))
        assert (tmp_path / "c.svg").read_bytes().startswith(b"<?xml")

    def test_no_series_is_error(self, tmp_path, synthetic_row):
        path = write_rows(tmp_path / "ref.csv",
                          [synthetic_row(estimator="oracle", N_s=0)])
        with pytest.raises(TableError):
            plot_convergence(ResultTable.from_csv(path), str(tmp_path / "x.png"))


class TestSortedErrors:
    def test_curves_sorted_and_equal_csv(self, tables, tmp_path):
        t = tables["paulis"]
        fig = plot_sorted_errors(t, str(tmp_path / "s.png"))
        lines = lines_by_label(fig.axes[0])
        for name in ("pec", "conventional", "pec-readout"):
            expected = sorted((r.abs_error for r in t.where(estimator=name)),
                              reverse=True)
            y = lines[name].get_ydata()
            np.testing.assert_array_equal(y, expected)
            assert all(a >= b for a, b in zip(y, y[1:]))

    def test_bound_lines_equal_distinct_csv_bounds(self, tables, tmp_path):
        t = tables["paulis"]
        fig = plot_sorted_errors(t, str(tmp_path / "s.png"))
        drawn = sorted(
            ln.get_ydata()[0] for ln in fig.axes[0].get_lines()
            if ln.get_linestyle() == ":"
        )
        expected = sorted(
            {r.bound for r in t.rows if r.bound is not None}
        )
        np.testing.assert_array_equal(drawn, expected)

    def test_truncates_to_worst_200(self, tmp_path, synthetic_row):
        rows = [
            synthetic_row(observable=f"O{i}", abs_error=float(i), bound="")
            for i in range(250)
        ]
        path = write_rows(tmp_path / "many.csv", rows)
        fig = plot_sorted_errors(ResultTable.from_csv(path),
                                 str(tmp_path / "many.png"))
        (line,) = lines_by_label(fig.axes[0]).values()
        assert len(line.get_ydata()) == TOP_ERRORS_SHOWN
        # worst first: the 200 largest of 0..249 are 249..50
        np.testing.assert_array_equal(
            line.get_ydata(), np.arange(249, 49, -1, dtype=float)
        )

    def test_no_errors_is_error(self, tmp_path, synthetic_row):
        path = write_rows(
            tmp_path / "none.csv",
            [synthetic_row(abs_error="", oracle_value="", bound="")],
        )
        with pytest.raises(TableError):
            plot_sorted_errors(ResultTable.from_csv(path), str(tmp_path / "x.png"))


class TestZne:
    def test_levels_and_values_from_csv(self, tables, tmp_path):
        t = tables["zne"]
        fig = plot_zne(t, str(tmp_path / "z.png"))
        axes = {ax.get_title(): ax for ax in fig.axes}
        assert set(axes) == {"Z0 Z1", "X0", "Y1 Z2"}
        for obs, ax in axes.items():
            measured = lines_by_label(ax)["measured"]
            np.testing.assert_array_equal(
                measured.get_xdata(), [0.002, 0.004, 0.01]
            )
            expected = [
                t.where(observable=obs, estimator=f"noisy(0.002)")[0].value,
                t.where(observable=obs, estimator=f"boosted(0.004)")[0].value,
                t.where(observable=obs, estimator=f"boosted(0.01)")[0].value,
            ]
            np.testing.assert_array_equal(measured.get_ydata(), expected)

    def test_intercept_marker_equals_extrapolated_value(self, tables, tmp_path):
        t = tables["zne"]
        fig = plot_zne(t, str(tmp_path / "z.png"))
        for ax in fig.axes:
            star = lines_by_label(ax)["zne-linear"]
            assert star.get_xdata()[0] == 0.0
            expected = t.where(observable=ax.get_title(),
                               estimator="zne-linear")[0].value
            assert star.get_ydata()[0] == expected

    def test_no_level_rows_is_error(self, tmp_path, synthetic_row):
        path = write_rows(tmp_path / "flat.csv", [synthetic_row()])
        with pytest.raises(TableError):
            plot_zne(ResultTable.from_csv(path), str(tmp_path / "x.png"))


class TestPurityMap:
    def test_cells_equal_csv_values(self, tables, tmp_path):
        t = tables["entropy"]
        fig = plot_purity_map(t, str(tmp_path / "p.png"))
        ax_v, ax_e = fig.axes[0], fig.axes[1]
        grid = np.asarray(ax_v.get_images()[0].get_array())
        errs = np.asarray(ax_e.get_images()[0].get_array())
        estimators = [t.get_text() for t in ax_v.get_yticklabels()]
        subsystems = [t.get_text() for t in ax_v.get_xticklabels()]
        for i, est in enumerate(estimators):
            for j, sub in enumerate(subsystems):
                row = t.where(estimator=est, observable=f"purity:{sub}")[0]
                assert grid[i, j] == row.value
                assert errs[i, j] == row.abs_error

    def test_no_purity_rows_is_error(self, tables, tmp_path):
        with pytest.raises(TableError):
            plot_purity_map(tables["zne"], str(tmp_path / "x.png"))


class TestDeterminism:
    def test_series_identical_across_runs(self, tables, tmp_path):
        t = tables["energy"]
        a = plot_convergence(t, str(tmp_path / "a.png"))
        b = plot_convergence(t, str(tmp_path / "b.png"))
        for la, lb in zip(a.axes[0].get_lines(), b.axes[0].get_lines()):
            np.testing.assert_array_equal(la.get_xdata(), lb.get_xdata())
            np.testing.assert_array_equal(la.get_ydata(), lb.get_ydata())
