"""Command-line interface: CSV ingestion, detection, penalty sweeps, benchmarks.

Two subcommands::

    npcpt detect [--cost np|np-full|linear] [--K auto|INT]
                 (--penalty VALUE | --crops MIN MAX) [options] data.csv
    npcpt bench config.txt [--seed INT] [--out DIR]

``detect`` writes machine-readable artifacts: a segmentation as JSON for a
single penalty, or a penalty-path JSON plus an ``m,cost`` elbow CSV for a
sweep. Artifact bytes are deterministic for identical inputs and flags (keys
sorted, floats serialized by ``repr``). Exit codes: 0 success, 1 usage error,
2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .costs import FullEdfCost, LinearTrendCost, QuantileEdfCost, default_n_quantiles
from .crops import PenaltyPath, crops_sweep, elbow_curve, suggest_elbow
from .search import Segmentation, pelt
from .series import TimeSeries
from .simbench import benchmark_from_config, load_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

SEED_ENV_VAR = "NPCPT_SEED"

ZONE_NAMES = ("peak", "anaerobic", "aerobic", "recovery")


class UsageError(Exception):
    """Bad flags or flag combinations (exit code 1)."""


class DataError(Exception):
    """Unreadable or invalid input data (exit code 2)."""


@dataclass(frozen=True)
class ZoneConfig:
    """Heart-rate training zones as fractions of a maximum heart rate.

    ``thresholds`` are the descending lower bounds of the peak, anaerobic and
    aerobic zones; anything below the last is recovery. A segment mean equal
    to a boundary belongs to the higher zone.
    """

    max_hr: float
    thresholds: tuple[float, float, float] = (0.90, 0.80, 0.70)

    def __post_init__(self):
        if self.max_hr <= 0:
            raise ValueError(f"max_hr must be positive, got {self.max_hr}")
        t = self.thresholds
        if len(t) != 3 or not (1.0 > t[0] > t[1] > t[2] > 0.0):
            raise ValueError(
                f"thresholds must be three descending fractions in (0, 1), got {t}"
            )

    def label(self, value: float) -> str:
        fraction = value / self.max_hr
        for name, bound in zip(ZONE_NAMES, self.thresholds):
            if fraction >= bound:
                return name
        return ZONE_NAMES[-1]


def annotate_zones(segmentation: Segmentation, series, zones: ZoneConfig) -> list[str]:
    """Zone label of each segment, by its mean value relative to ``max_hr``."""
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series, float)
    return [
        zones.label(float(values[start:end].mean()))
        for start, end in segmentation.segments()
    ]


def _parse_cell(cell: str, row_number: int, column: str | int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(
            f"row {row_number}: cannot parse {cell!r} in column {column!r} as a number"
        ) from None
    if not math.isfinite(value):
        raise DataError(
            f"row {row_number}: non-finite value {cell!r} in column {column!r}"
        )
    return value


def ingest_csv(path, value_column=None, has_header: bool | None = None) -> TimeSeries:
    """Read one numeric column of a CSV into a :class:`TimeSeries`.

    Parameters
    ----------
    path : str or Path
        UTF-8 comma-separated file, one observation per row.
    value_column : str, int or None
        Column name (requires a header) or 0-based index. ``None`` takes the
        last column, which suits ``time,value`` layouts.
    has_header : bool or None
        ``None`` auto-detects: a first row whose target cell does not parse
        as a number is treated as a header.

    Row order is preserved. Any unparseable or non-finite cell aborts with an
    error naming the 1-based file row; rows are never silently skipped.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        rows = [(number, row) for number, row in enumerate(csv.reader(handle), start=1) if row]
    if not rows:
        raise DataError(f"{path}: empty series")

    first_row = rows[0][1]

    def resolve_index(row: list[str]) -> int:
        if value_column is None:
            return len(row) - 1
        if isinstance(value_column, int) or (
            isinstance(value_column, str) and value_column.lstrip("-").isdigit()
        ):
            index = int(value_column)
            if not 0 <= index < len(row):
                raise DataError(
                    f"column index {index} out of range for {len(row)} columns"
                )
            return index
        if value_column not in row:
            raise DataError(
                f"no column named {value_column!r}; header is {first_row!r}"
            )
        return row.index(value_column)

    named_column = isinstance(value_column, str) and not value_column.lstrip("-").isdigit()
    if has_header is None:
        if named_column:
            header = True
        else:
            try:
                float(first_row[resolve_index(first_row)])
                header = False
            except (ValueError, DataError):
                header = True
    else:
        header = has_header
    if named_column and not header:
        raise DataError(
            f"column {value_column!r} requested by name but the file has no header"
        )

    index = resolve_index(first_row)
    data_rows = rows[1:] if header else rows
    if not data_rows:
        raise DataError(f"{path}: empty series")

    values = []
    for number, row in data_rows:
        if index >= len(row):
            raise DataError(f"row {number}: missing column {index}")
        values.append(_parse_cell(row[index], number, value_column if value_column is not None else index))
    return TimeSeries(values)


def _resolve_penalty_token(token: str, n: int) -> float:
    symbolic = {"logn": 1.0, "2logn": 2.0, "3logn": 3.0}
    if token in symbolic:
        return symbolic[token] * math.log(n)
    try:
        value = float(token)
    except ValueError:
        raise UsageError(
            f"--penalty must be a number or one of {sorted(symbolic)}, got {token!r}"
        ) from None
    if value < 0:
        raise UsageError(f"--penalty must be nonnegative, got {value}")
    return value


def _build_cost(args, n: int):
    if args.cost == "np":
        if args.K == "auto":
            n_quantiles = default_n_quantiles(n)
        else:
            try:
                n_quantiles = int(args.K)
            except ValueError:
                raise UsageError(f"--K must be 'auto' or an integer, got {args.K!r}") from None
        if not 1 <= n_quantiles <= n:
            raise UsageError(f"--K must be in [1, {n}], got {n_quantiles}")
        return QuantileEdfCost(n_quantiles=n_quantiles), "np-pelt+", n_quantiles
    if args.cost == "np-full":
        return FullEdfCost(), "np-pelt-full", None
    return LinearTrendCost(), "linear-pelt", None


def _segment_entries(
    segmentation: Segmentation, series: TimeSeries, cost, zones: ZoneConfig | None
) -> list[dict]:
    labels = annotate_zones(segmentation, series, zones) if zones else None
    entries = []
    for i, (start, end) in enumerate(segmentation.segments()):
        entry = {
            "start": int(start),
            "end": int(end),
            "mean": float(series.values[start:end].mean()),
            "cost": float(cost.segment_cost(start, end)),
        }
        if labels:
            entry["zone"] = labels[i]
        entries.append(entry)
    return entries


def _segmentation_payload(
    segmentation: Segmentation,
    series: TimeSeries,
    cost,
    method: str,
    n_quantiles: int | None,
    zones: ZoneConfig | None,
    penalty: float | None = None,
    penalty_interval: tuple[float, float] | None = None,
) -> dict:
    payload = {
        "n": series.n,
        "method": method,
        "changepoints": [int(c) for c in segmentation.changepoints],
        "segments": _segment_entries(segmentation, series, cost, zones),
        "total_cost": float(segmentation.total_cost),
    }
    if n_quantiles is not None:
        payload["K"] = int(n_quantiles)
    if penalty is not None:
        payload["penalty"] = float(penalty)
    if penalty_interval is not None:
        payload["penalty_interval"] = [float(penalty_interval[0]), float(penalty_interval[1])]
    return payload


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_elbow_csv(path: Path, curve: list[tuple[int, float]]) -> None:
    with open(path, "w", newline="") as handle:
        handle.write("m,cost\n")
        for m, cost in curve:
            handle.write(f"{m},{cost!r}\n")


def _cmd_detect(args) -> int:
    if args.penalty is not None and args.crops is not None:
        raise UsageError("--penalty and --crops are mutually exclusive")
    if args.penalty is None and args.crops is None:
        raise UsageError("one of --penalty or --crops is required")

    series = ingest_csv(
        args.csv, args.column, False if args.no_header else None
    )
    zones = ZoneConfig(max_hr=args.max_hr) if args.max_hr is not None else None

    cost, method, n_quantiles = _build_cost(args, series.n)
    cost.fit(series)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.penalty is not None:
        penalty = _resolve_penalty_token(args.penalty, series.n)
        segmentation, _ = pelt(cost, penalty, args.min_seg_len)
        payload = _segmentation_payload(
            segmentation, series, cost, method, n_quantiles, zones, penalty=penalty
        )
        target = out_dir / "segmentation.json"
        _write_json(target, payload)
        print(
            f"{method}: n={series.n} penalty={penalty:.6g} "
            f"changepoints={segmentation.m} -> {target}"
        )
        return EXIT_OK

    lo, hi = args.crops
    if lo < 0 or not lo < hi:
        raise UsageError(
            f"--crops needs 0 <= MIN < MAX, got [{lo}, {hi}]"
        )
    path: PenaltyPath = crops_sweep(cost, lo, hi, args.min_seg_len)
    curve = elbow_curve(path)
    suggestion = suggest_elbow(curve)
    payload = {
        "n": series.n,
        "method": method,
        "penalty_range": [float(lo), float(hi)],
        "pelt_call_count": path.pelt_call_count,
        "suggested_m": suggestion,
        "elbow": [[int(m), float(c)] for m, c in curve],
        "entries": [
            _segmentation_payload(
                entry.segmentation,
                series,
                cost,
                method,
                n_quantiles,
                zones,
                penalty_interval=(entry.penalty_low, entry.penalty_high),
            )
            for entry in path.entries
        ],
    }
    if n_quantiles is not None:
        payload["K"] = int(n_quantiles)
    path_target = out_dir / "penalty_path.json"
    elbow_target = out_dir / "elbow.csv"
    _write_json(path_target, payload)
    _write_elbow_csv(elbow_target, curve)
    print(
        f"{method}: n={series.n} penalties=[{lo:.6g}, {hi:.6g}] "
        f"entries={len(path.entries)} suggested_m={suggestion} "
        f"-> {path_target}, {elbow_target}"
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        config = load_config(args.config)
    except FileNotFoundError:
        raise DataError(f"no such file: {args.config}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None

    seed_override = None
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            seed_override = int(env_seed)
        except ValueError:
            raise DataError(
                f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}"
            ) from None
    if args.seed is not None:
        seed_override = args.seed

    try:
        report = benchmark_from_config(config, seed_override=seed_override)
    except ValueError as exc:
        raise DataError(str(exc)) from None

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_target = out_dir / "bench_results.csv"
    json_target = out_dir / "bench_summary.json"
    report.write_csv(csv_target)
    report.write_summary_json(json_target)
    summary = report.summary()
    print(
        f"{summary['method']} model={summary['model_id']} n={summary['n']} "
        f"reps={summary['reps']}: tp={summary['mean_tp']:.3f} "
        f"fp={summary['mean_fp']:.3f} time={summary['mean_seconds']:.3f}s "
        f"-> {csv_target}, {json_target}"
    )
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="npcpt",
        description="Nonparametric changepoint detection for univariate CSV series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser(
        "detect", help="segment a series at one penalty or across a penalty range"
    )
    detect.add_argument("csv", help="input CSV (one observation per row)")
    detect.add_argument(
        "--cost",
        choices=("np", "np-full", "linear"),
        default="np",
        help="segment cost: quantile-approximated empirical CDF (np), "
        "exhaustive empirical CDF (np-full), or least-squares line (linear)",
    )
    detect.add_argument(
        "--K",
        default="auto",
        help="threshold count for --cost np; 'auto' uses ceil(4 log n)",
    )
    detect.add_argument(
        "--penalty",
        help="per-changepoint penalty: a number or logn/2logn/3logn",
    )
    detect.add_argument(
        "--crops",
        nargs=2,
        type=float,
        metavar=("MIN", "MAX"),
        help="sweep all optimal segmentations over a penalty range",
    )
    detect.add_argument(
        "--min-seg-len", type=int, default=None, help="minimum segment length"
    )
    detect.add_argument(
        "--column",
        default=None,
        help="value column by name or 0-based index (default: last column)",
    )
    detect.add_argument(
        "--no-header", action="store_true", help="treat the first row as data"
    )
    detect.add_argument(
        "--max-hr",
        type=float,
        default=None,
        help="annotate segments with heart-rate zones relative to this maximum",
    )
    detect.add_argument("--out", default=".", help="output directory")
    detect.set_defaults(func=_cmd_detect)

    bench = sub.add_parser("bench", help="run a configured simulation benchmark")
    bench.add_argument("config", help="key = value benchmark config file")
    bench.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"base seed (overrides the config and {SEED_ENV_VAR})",
    )
    bench.add_argument("--out", default=".", help="output directory")
    bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
