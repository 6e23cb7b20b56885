"""Command-line surface: run a test on CSV data, run simulation grids, and
reshape grid output into plot-data series.

Exit status: 0 on success, 2 on invalid input (bad flags or configuration),
3 on data errors (unreadable or unparseable files, too few rows).
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from enum import Enum

import numpy as np

from spearperm.core import (
    InsufficientDataError,
    InvalidInputError,
    DegenerateSampleError,
    PairedSample,
    ParseError,
    SpearpermError,
)
from spearperm.harness import (
    CSV_COLUMNS,
    GridConfig,
    PRESETS,
    plot_series,
    plot_series_to_csv,
    run_grid,
    summaries_to_csv,
    summaries_to_json,
)
from spearperm.hypotests import Method, run_test
from spearperm.scenarios import CANONICAL_SCENARIO_IDS, scenario_from_id

__all__ = ["ColumnSelector", "MissingPolicy", "read_paired_csv", "main"]

_MISSING_TOKENS = {"", "na", "nan", "n/a"}

_TABLE_SIZES = (10, 20, 50, 100, 200)


class MissingPolicy(Enum):
    DROP_PAIRWISE = "drop"
    ERROR = "error"


@dataclass(frozen=True)
class ColumnSelector:
    """x and y columns, each by header name or 0-based index."""

    x: str
    y: str

    def __post_init__(self):
        if self.x == self.y:
            raise InvalidInputError("x and y must select distinct columns")


def _resolve_column(selector, header, path):
    """Map a name-or-index selector to a column position."""
    if header is not None and selector in header:
        return header.index(selector)
    try:
        idx = int(selector)
    except ValueError:
        raise InvalidInputError(f"column {selector!r} not found in {path}")
    if idx < 0:
        raise InvalidInputError(f"column index must be >= 0, got {idx}")
    return idx


def _parse_cell(text, row_number):
    stripped = text.strip()
    if stripped.lower() in _MISSING_TOKENS:
        return None
    try:
        return float(stripped)
    except ValueError:
        raise ParseError(f"row {row_number}: cannot parse {text!r} as a number",
                         row=row_number)


def read_paired_csv(path, selector: ColumnSelector, policy=MissingPolicy.DROP_PAIRWISE) -> PairedSample:
    """Load two numeric columns from a CSV file into a paired sample.

    The first row is treated as a header unless both selectors are numeric
    indices and that row already parses as data. Rows with a missing value in
    either selected column are dropped (drop policy) or rejected (error
    policy); anything unparseable is an error with its 1-based row number.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    if not rows:
        raise InsufficientDataError(f"{path} is empty")

    header = [cell.strip() for cell in rows[0]]
    data_start = 1
    if _looks_like_data(rows[0], selector):
        header = None
        data_start = 0
    x_col = _resolve_column(selector.x, header, path)
    y_col = _resolve_column(selector.y, header, path)
    if x_col == y_col:
        raise InvalidInputError("x and y must select distinct columns")

    xs, ys = [], []
    for offset, row in enumerate(rows[data_start:]):
        row_number = data_start + offset + 1
        if not row or all(not cell.strip() for cell in row):
            continue
        if max(x_col, y_col) >= len(row):
            raise ParseError(f"row {row_number}: too few columns", row=row_number)
        x_val = _parse_cell(row[x_col], row_number)
        y_val = _parse_cell(row[y_col], row_number)
        if x_val is None or y_val is None:
            if policy is MissingPolicy.ERROR:
                raise ParseError(f"row {row_number}: missing value", row=row_number)
            continue
        xs.append(x_val)
        ys.append(y_val)
    if len(xs) < 2:
        raise InsufficientDataError(
            f"{path}: fewer than 2 complete pairs after filtering"
        )
    return PairedSample(np.array(xs), np.array(ys))


def _looks_like_data(first_row, selector):
    """Headerless only when both selectors are indices into parseable cells."""
    try:
        x_idx, y_idx = int(selector.x), int(selector.y)
    except ValueError:
        return False
    if max(x_idx, y_idx) >= len(first_row):
        return False
    for idx in (x_idx, y_idx):
        cell = first_row[idx].strip()
        if cell.lower() in _MISSING_TOKENS:
            continue
        try:
            float(cell)
        except ValueError:
            return False
    return True


def _apply_transforms(sample, args):
    xs, ys = sample.xs, sample.ys
    if args.log_x:
        if np.any(xs <= 0):
            raise InsufficientDataError("--log-x requires strictly positive x values")
        xs = np.log(xs)
    if args.log_y:
        if np.any(ys <= 0):
            raise InsufficientDataError("--log-y requires strictly positive y values")
        ys = np.log(ys)
    if args.negate_y:
        ys = -ys
    return PairedSample(xs, ys)


def _write_output(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


def _cmd_test(args):
    sample = read_paired_csv(
        args.csv, ColumnSelector(x=args.x, y=args.y), MissingPolicy(args.missing)
    )
    sample = _apply_transforms(sample, args)
    result = run_test(
        args.method, sample, args.alt, args.b, args.seed, args.add_one_correction
    )
    payload = {
        "method": result.method.value,
        "alternative": result.alternative.value,
        "n": result.n,
        "estimate": result.estimate,
        "statistic": result.statistic,
        "p_value": result.p_value,
        "permutations": result.permutations,
        "seed": result.seed,
        "degenerate": result.degenerate,
    }
    _write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_simulate(args):
    preset = PRESETS[args.preset]
    reps = args.reps if args.reps is not None else preset["reps"]
    permutations = args.b if args.b is not None else preset["permutations"]
    scenario_ids = args.scenario or list(CANONICAL_SCENARIO_IDS)
    sizes = args.n or list(_TABLE_SIZES)
    methods = args.method or [m.value for m in Method]
    config = GridConfig(
        scenarios=tuple(scenario_from_id(s) for s in scenario_ids),
        sample_sizes=tuple(sizes),
        tests=tuple(methods),
        alpha=args.alpha,
        reps=reps,
        permutations=permutations,
        master_seed=args.seed,
        alternative=args.alt,
        add_one_correction=args.add_one_correction,
    )
    summaries = run_grid(config, workers=args.workers)
    if args.format == "json":
        text = summaries_to_json(summaries)
    else:
        text = summaries_to_csv(summaries)
    _write_output(text, args.out)
    return 0


def _cmd_report(args):
    try:
        with open(args.gridcsv, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(CSV_COLUMNS) - set(reader.fieldnames):
                raise ParseError(f"{args.gridcsv}: not a simulation grid CSV")
            rows = list(reader)
    except OSError as exc:
        raise ParseError(f"cannot read {args.gridcsv}: {exc}")
    if not rows:
        raise InsufficientDataError(f"{args.gridcsv}: no rows")

    grouped = {}
    for i, row in enumerate(rows, start=2):
        try:
            key = (row["scenario"], row["method"])
            grouped.setdefault(key, []).append(
                (int(row["n"]), float(row["rejection_rate"]))
            )
        except (TypeError, ValueError):
            raise ParseError(f"row {i}: malformed grid row", row=i)
    series = []
    for (scenario, method), points in sorted(grouped.items()):
        points.sort()
        series.append({
            "scenario": scenario,
            "method": method,
            "n": [p[0] for p in points],
            "rejection_rate": [p[1] for p in points],
        })
    if args.format == "csv":
        text = plot_series_to_csv(series)
    else:
        text = json.dumps(series, indent=2, sort_keys=True) + "\n"
    _write_output(text, args.out)
    return 0


def _uint64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spearperm",
        description="Tests of zero rank correlation and the type I error "
                    "simulation harness around them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    method_ids = [m.value for m in Method]
    alts = ["greater", "less", "two-sided"]

    p_test = sub.add_parser("test", help="run one test on paired CSV columns")
    p_test.add_argument("csv", help="input CSV file")
    p_test.add_argument("--x", required=True, help="x column (name or 0-based index)")
    p_test.add_argument("--y", required=True, help="y column (name or 0-based index)")
    p_test.add_argument("--method", default="stu-permute", choices=method_ids)
    p_test.add_argument("--alt", default="greater", choices=alts)
    p_test.add_argument("--b", type=int, default=1000,
                        help="permutation count for permutation tests")
    p_test.add_argument("--seed", type=_uint64, default=0)
    p_test.add_argument("--missing", default="drop", choices=["drop", "error"])
    p_test.add_argument("--negate-y", action="store_true",
                        help="flip the sign of y before testing")
    p_test.add_argument("--log-x", action="store_true")
    p_test.add_argument("--log-y", action="store_true")
    p_test.add_argument("--add-one-correction", action="store_true",
                        help="use (count+1)/(B+1) permutation p-values")
    p_test.add_argument("--out", default=None)
    p_test.add_argument("--format", default="json", choices=["json"])
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="run a type I error grid")
    p_sim.add_argument("--preset", default="paper", choices=sorted(PRESETS))
    p_sim.add_argument("--scenario", action="append",
                       help="scenario id (repeatable); default: all of "
                            + ", ".join(CANONICAL_SCENARIO_IDS))
    p_sim.add_argument("--n", action="append", type=int,
                       help="sample size (repeatable); default: "
                            + " ".join(str(n) for n in _TABLE_SIZES))
    p_sim.add_argument("--method", action="append", choices=method_ids,
                       help="test method (repeatable); default: all six")
    p_sim.add_argument("--alt", default="greater", choices=alts)
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--reps", type=int, default=None,
                       help="override the preset replicate count")
    p_sim.add_argument("--b", type=int, default=None,
                       help="override the preset permutation count")
    p_sim.add_argument("--seed", type=_uint64, default=0)
    p_sim.add_argument("--workers", type=int, default=None,
                       help="parallel worker processes (default: all cores)")
    p_sim.add_argument("--add-one-correction", action="store_true")
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--format", default="csv", choices=["csv", "json"])
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = sub.add_parser("report", help="reshape a grid CSV into plot-data series")
    p_rep.add_argument("gridcsv", help="CSV produced by the simulate command")
    p_rep.add_argument("--out", default=None)
    p_rep.add_argument("--format", default="json", choices=["json", "csv"])
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, InsufficientDataError, DegenerateSampleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InvalidInputError, SpearpermError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
