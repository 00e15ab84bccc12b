"""Typed access to experiment result CSV tables.

The producing CLI writes one row per (estimator, observable, snapshot count)
with the fixed column set below.  This module parses such a file into plain
Python values and validates it; the plot functions consume only this
representation, never the producing package.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

COLUMNS = (
    "experiment",
    "N_s",
    "estimator",
    "observable",
    "value",
    "stderr",
    "oracle_value",
    "abs_error",
    "bound",
)

_INT_COLUMNS = ("N_s",)
_FLOAT_COLUMNS = ("value", "stderr", "oracle_value", "abs_error", "bound")


class TableError(ValueError):
    """Raised for missing columns, unparsable or non-finite numbers, or an
    empty table."""


@dataclass(frozen=True)
class Row:
    experiment: str
    N_s: int
    estimator: str
    observable: str
    value: float
    stderr: float | None
    oracle_value: float | None
    abs_error: float | None
    bound: float | None


@dataclass(frozen=True)
class ResultTable:
    rows: tuple[Row, ...]

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def experiment(self) -> str:
        return self.rows[0].experiment

    def estimators(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.estimator)
        return list(seen)

    def where(self, **conditions) -> list[Row]:
        out = []
        for r in self.rows:
            if all(getattr(r, k) == v for k, v in conditions.items()):
                out.append(r)
        return out

    @classmethod
    def from_csv(cls, path: str) -> "ResultTable":
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            header = reader.fieldnames or []
            missing = [c for c in COLUMNS if c not in header]
            if missing:
                raise TableError(f"missing columns: {', '.join(missing)}")
            rows = []
            for lineno, raw in enumerate(reader, start=2):
                rows.append(_parse_row(raw, lineno))
        if not rows:
            raise TableError(f"{path} contains no data rows")
        return cls(tuple(rows))


def _parse_row(raw: dict, lineno: int) -> Row:
    fields: dict = {}
    for c in ("experiment", "estimator", "observable"):
        fields[c] = raw[c]
    for c in _INT_COLUMNS:
        try:
            fields[c] = int(raw[c])
        except ValueError as exc:
            raise TableError(f"line {lineno}: bad integer {c}={raw[c]!r}") from exc
    for c in _FLOAT_COLUMNS:
        text = raw[c]
        if text == "":
            fields[c] = None
            continue
        try:
            v = float(text)
        except ValueError as exc:
            raise TableError(f"line {lineno}: bad number {c}={text!r}") from exc
        if not math.isfinite(v):
            raise TableError(f"line {lineno}: non-finite {c}={text!r}")
        fields[c] = v
    if fields["value"] is None:
        raise TableError(f"line {lineno}: empty value column")
    return Row(**fields)
