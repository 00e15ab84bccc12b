"""Command line: render one figure kind from a result CSV.

    plotkit <kind> <csv> --out figure.png

Kinds: convergence, sorted-errors, zne, purity-map.  Output format follows
the --out suffix (png, svg, pdf, ...).  Exit codes: 0 success, 2 bad
arguments or malformed table, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .plots import PLOT_KINDS
from .table import ResultTable, TableError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    parser.add_argument("kind", choices=sorted(PLOT_KINDS))
    parser.add_argument("csv", help="result CSV file")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        table = ResultTable.from_csv(args.csv)
        PLOT_KINDS[args.kind](table, args.out)
    except TableError as exc:
        print(f"table error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
