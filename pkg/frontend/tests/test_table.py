import pytest

from conftest import write_rows
from plotkit.table import ResultTable, TableError


class TestParsing:
    def test_golden_tables_parse(self, tables):
        assert set(tables) == {"energy", "entropy", "paulis", "zne"}
        for t in tables.values():
            assert len(t) > 0

    def test_typed_columns(self, tables):
        r = tables["paulis"].rows[0]
        assert isinstance(r.N_s, int)
        assert isinstance(r.value, float)
        assert isinstance(r.observable, str)

    def test_empty_cells_become_none(self, tables):
        bias = tables["energy"].where(estimator="bias")[0]
        assert bias.oracle_value is None and bias.bound is None

    def test_estimators_in_first_seen_order(self, tables):
        ests = tables["energy"].estimators()
        assert ests[0] == "oracle" and "pec" in ests and "conventional" in ests

    def test_where_filters_exactly(self, tables):
        rows = tables["zne"].where(observable="X0", estimator="zne-linear")
        assert len(rows) == 1


class TestValidation:
    def test_missing_column_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("experiment,N_s\nx,1\n")
        with pytest.raises(TableError, match="missing columns"):
            ResultTable.from_csv(str(p))

    def test_empty_table_rejected(self, tmp_path, synthetic_row):
        path = write_rows(tmp_path / "empty.csv", [])
        with pytest.raises(TableError, match="no data rows"):
            ResultTable.from_csv(path)

    def test_non_finite_rejected(self, tmp_path, synthetic_row):
        path = write_rows(tmp_path / "nan.csv", [synthetic_row(value="nan")])
        with pytest.raises(TableError, match="non-finite"):
            ResultTable.from_csv(path)

    def test_bad_number_rejected(self, tmp_path, synthetic_row):
        path = write_rows(tmp_path / "txt.csv", [synthetic_row(stderr="oops")])
        with pytest.raises(TableError, match="bad number"):
            ResultTable.from_csv(path)

    def test_bad_integer_rejected(self, tmp_path, synthetic_row):
        path = write_rows(tmp_path / "int.csv", [synthetic_row(N_s="many")])
        with pytest.raises(TableError, match="bad integer"):
            ResultTable.from_csv(path)
