import csv
import pathlib

import pytest

from plotkit.table import COLUMNS, ResultTable

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def tables():
    return {p.stem: ResultTable.from_csv(str(p)) for p in sorted(DATA.glob("*.csv"))}


def write_rows(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return str(path)


@pytest.fixture()
def synthetic_row():
    def make(**kw):
        base = {
            "experiment": "all-local-paulis", "N_s": 1000, "estimator": "pec",
            "observable": "Z0", "value": 0.5, "stderr": 0.01,
            "oracle_value": 0.49, "abs_error": 0.01, "bound": 0.2,
        }
        base.update(kw)
        return base

    return make
