"""Figure rendering for experiment result CSV tables."""

from .plots import (
    PLOT_KINDS,
    plot_convergence,
    plot_purity_map,
    plot_sorted_errors,
    plot_zne,
)
from .table import COLUMNS, ResultTable, Row, TableError

__all__ = [
    "COLUMNS",
    "PLOT_KINDS",
    "ResultTable",
    "Row",
    "TableError",
    "plot_convergence",
    "plot_purity_map",
    "plot_sorted_errors",
    "plot_zne",
]

__version__ = "0.1.0"
