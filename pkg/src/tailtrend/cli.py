"""Command-line interface: ingest, estimate, sweep, test, simulate.

Every command is a pure function of its inputs, flags and seed: identical
invocations produce identical output bytes.  Exit codes: 0 success, 2 usage
error, 3 input/parse error, 4 numerical/domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, inference, trend
from .errors import EstimationError
from .ingest import (BlockPanel, DailyParseError, build_panel, completeness_filter,
                     parse_daily, write_rain_day_table)
from .panel import SamplePanel
from .simulate import DEFAULT_K_GRID, SimDesign, run_design

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4

_SE_NOTE = "standard errors assume an undersmoothed k (no bias term)"


class InputError(Exception):
    """Problem reading or interpreting an input file."""


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.6g}"


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_rows(path, header, rows, fmt: str) -> None:
    if fmt == "json":
        _write_text(path, json.dumps(rows, indent=2) + "\n")
    else:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(row.get(col)) for col in header))
        _write_text(path, "\n".join(lines) + "\n")


def _parse_window(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YEAR:YEAR, got {text!r}") from None


def _parse_k_grid(args) -> tuple:
    if args.k is not None:
        return (args.k,)
    k_min = args.k_min if args.k_min is not None else DEFAULT_K_GRID[0]
    k_max = args.k_max if args.k_max is not None else DEFAULT_K_GRID[-1]
    k_step = args.k_step if args.k_step is not None else 5
    if k_min < 1 or k_max < k_min or k_step < 1:
        raise InputError(f"bad k grid: min={k_min} max={k_max} step={k_step}")
    return tuple(range(k_min, k_max + 1, k_step))


def _load_input(path, args):
    """Load a panel from a BlockPanel JSON file or a raw daily file."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"input file not found: {path}")
    text = p.read_text(errors="replace")
    head = text.lstrip()[:1]
    if head == "{":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON: {exc}") from None
        try:
            if "blocks" in doc and "station_id" in doc:
                block = BlockPanel.from_dict(doc)
                return block.to_sample_panel(), str(block.station_id)
            groups = doc.get("blocks", doc.get("groups"))
            if groups is None:
                raise KeyError("blocks")
            return SamplePanel.from_groups(
                [np.asarray(g, dtype=float) for g in groups],
                np.asarray(doc["s"], dtype=float) if "s" in doc else None,
            ), str(doc.get("station_id", "-"))
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"{path}: not a valid panel document: {exc}") from None
    series = parse_daily(text, station_name=args.station_name or "")
    try:
        window, _ = completeness_filter(series, args.window, max_missing=args.max_missing)
        block = build_panel(series, window, block_years=args.block_years)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    return block.to_sample_panel(), str(series.station_id)


def _add_input_opts(p, single=True):
    if single:
        p.add_argument("input", help="panel JSON or raw daily file")
    p.add_argument("--window", type=_parse_window, default=(1918, 2007),
                   metavar="Y0:Y1", help="year window for raw daily input (default 1918:2007)")
    p.add_argument("--block-years", type=int, default=5, help="years per block (default 5)")
    p.add_argument("--max-missing", type=int, default=10,
                   help="missing days per year that disqualify it (default 10)")
    p.add_argument("--station-name", default=None, help="station name for raw input")


def _add_out_opts(p, default_fmt="csv"):
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default_fmt)


def _estimator_list(text: str):
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = set(names) - {"c1", "c2", "c3"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown estimators: {sorted(bad)}")
    if not names:
        raise argparse.ArgumentTypeError("empty estimator list")
    return names


def _statistic_list(text: str):
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = set(names) - {"q1", "q2"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown statistics: {sorted(bad)}")
    if not names:
        raise argparse.ArgumentTypeError("empty statistic list")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailtrend",
        description="Estimate and test temporal trends in tail exceedance probabilities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse daily files into declustered block panels")
    p.add_argument("inputs", nargs="+", help="raw daily files (ECA&D-style)")
    p.add_argument("--out", required=True,
                   help="output panel JSON (single input) or directory")
    p.add_argument("--window", type=_parse_window, default=(1918, 2007), metavar="Y0:Y1")
    p.add_argument("--block-years", type=int, default=5)
    p.add_argument("--max-missing", type=int, default=10)
    p.add_argument("--station-name", default=None)
    p.add_argument("--rain-days", default=None, help="also write a rain-day summary CSV here")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("estimate", help="trend estimates at one k (table row shape)")
    _add_input_opts(p)
    p.add_argument("--k", type=int, required=True, help="number of upper order statistics")
    p.add_argument("--estimators", type=_estimator_list, default=("c1", "c2", "c3"))
    _add_out_opts(p)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("sweep", help="trend estimates over a grid of k values")
    _add_input_opts(p)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--k-step", type=int, default=None)
    p.add_argument("--estimators", type=_estimator_list, default=("c1", "c2", "c3"))
    _add_out_opts(p)
    p.set_defaults(fn=cmd_sweep, k=None)

    p = sub.add_parser("test", help="no-trend tests over one k or a k grid")
    _add_input_opts(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--k-step", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--statistics", type=_statistic_list, default=("q1", "q2"))
    _add_out_opts(p, default_fmt="json")
    p.set_defaults(fn=cmd_test)

    p = sub.add_parser("simulate", help="Monte Carlo replication sweep")
    p.add_argument("--design", default=None, help="design document (JSON or TOML)")
    p.add_argument("--family", choices=("gpd", "pareto", "cauchy"), default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--k-step", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    _add_out_opts(p)
    p.set_defaults(fn=cmd_simulate, k=None)

    return parser


def cmd_ingest(args) -> int:
    out = Path(args.out)
    multi = len(args.inputs) > 1
    out_is_dir = multi or not out.suffix == ".json"
    if out_is_dir:
        out.mkdir(parents=True, exist_ok=True)
    panels = []
    for path in args.inputs:
        p = Path(path)
        if not p.exists():
            raise InputError(f"input file not found: {path}")
        series = parse_daily(p.read_text(errors="replace"),
                             station_name=args.station_name or "")
        try:
            window, report = completeness_filter(series, args.window,
                                                 max_missing=args.max_missing)
            block = build_panel(series, window, block_years=args.block_years)
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from None
        panels.append(block)
        target = out / f"{series.station_id}_panel.json" if out_is_dir else out
        target.write_text(block.to_json(indent=2) + "\n")
        flagged = ", ".join(map(str, report.flagged_years)) or "none"
        print(f"station {series.station_id}: kept {window[0]}-{window[1]}, "
              f"{block.m + 1} blocks, {block.rain_days_total} rain days "
              f"(flagged years: {flagged})", file=sys.stderr)
    if args.rain_days:
        write_rain_day_table(panels, args.rain_days)
    return EXIT_OK


def cmd_estimate(args) -> int:
    panel, station = _load_input(args.input, args)
    rows = []
    failures = []
    for name in args.estimators:
        row = {"station": station, "estimator": name, "k": args.k,
               "c_hat": None, "se_hat": None, "gamma_hat": None, "a0_hat": None}
        try:
            if name == "c1":
                fit = trend.estimate_c1(panel, args.k)
            elif name == "c2":
                fit = inference.attach_se(trend.estimate_c2(panel, args.k), panel.s[1:])
            else:
                fit = trend.estimate_c3(panel, args.k)
            row.update(c_hat=fit.c_hat, se_hat=fit.se_hat,
                       gamma_hat=fit.gamma_hat, a0_hat=fit.a0_hat)
        except (EstimationError, ValueError) as exc:
            failures.append(f"{name}: {exc}")
        rows.append(row)
    for msg in failures:
        print(f"warning: {msg}", file=sys.stderr)
    if len(failures) == len(args.estimators):
        print("error: every requested estimator failed", file=sys.stderr)
        return EXIT_NUMERIC
    header = ["station", "estimator", "k", "c_hat", "se_hat", "gamma_hat", "a0_hat"]
    if args.format == "json":
        _write_text(args.out, json.dumps({"note": _SE_NOTE, "fits": rows}, indent=2) + "\n")
    else:
        _write_rows(args.out, header, rows, "csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    panel, _ = _load_input(args.input, args)
    k_grid = _parse_k_grid(args)
    k_grid = tuple(k for k in k_grid if k <= min(panel.group_sizes) - 1)
    if not k_grid:
        raise InputError("k grid is empty after clipping to the group sizes")
    rows = trend.k_sweep(panel, k_grid, estimators=args.estimators)
    header = ["k", "c1", "c2", "c3", "gamma_plus", "gamma_moment", "a0"]
    _write_rows(args.out, header, rows, args.format)
    return EXIT_OK


def cmd_test(args) -> int:
    panel, _ = _load_input(args.input, args)
    k_grid = _parse_k_grid(args)
    k_grid = tuple(k for k in k_grid if k <= min(panel.group_sizes) - 1)
    if not k_grid:
        raise InputError("k grid is empty after clipping to the group sizes")
    rows = []
    for k in k_grid:
        for name in args.statistics:
            row = {"k": k, "test": name, "statistic": None, "df": panel.m,
                   "alpha": args.alpha, "critical_value": None,
                   "p_value": None, "reject": None}
            fn = inference.test_q1 if name == "q1" else inference.test_q2
            try:
                row.update(fn(panel, k, alpha=args.alpha).to_dict())
            except (EstimationError, ValueError):
                pass
            rows.append(row)
    header = ["k", "test", "statistic", "df", "alpha", "critical_value", "p_value", "reject"]
    _write_rows(args.out, header, rows, args.format)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.design is not None:
        path = Path(args.design)
        if not path.exists():
            raise InputError(f"design file not found: {args.design}")
        try:
            design = SimDesign.from_file(path)
        except (ValueError, KeyError) as exc:
            raise InputError(f"{args.design}: {exc}") from None
    else:
        required = {"family": args.family, "gamma": args.gamma, "c": args.c,
                    "n": args.n, "m": args.m, "replications": args.replications}
        missing = [k for k, v in required.items() if v is None]
        if missing:
            print(f"usage error: simulate needs --design or all of "
                  f"--family/--gamma/--c/--n/--m/--replications (missing: {', '.join(missing)})",
                  file=sys.stderr)
            return EXIT_USAGE
        k_min = args.k_min if args.k_min is not None else DEFAULT_K_GRID[0]
        k_max = args.k_max if args.k_max is not None else DEFAULT_K_GRID[-1]
        k_step = args.k_step if args.k_step is not None else 5
        design = SimDesign(family=args.family, gamma=args.gamma, c=args.c,
                           n=args.n, m=args.m, replications=args.replications,
                           k_grid=tuple(range(k_min, k_max + 1, k_step)),
                           seed=args.seed)

    stride = max(1, design.replications // 20)

    def progress(done, total):
        if not args.quiet and (done % stride == 0 or done == total):
            print(f"replication {done}/{total}", file=sys.stderr)

    result = run_design(design, progress=progress)
    if args.format == "json":
        _write_text(args.out, result.to_json(indent=2) + "\n")
    elif args.out is None:
        rows = result.rows()
        header = ["k", "estimator", "mean", "sd", "errors"]
        _write_rows(None, header, rows, "csv")
    else:
        result.write_csv(args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.fn(args)
    except (InputError, DailyParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EstimationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
