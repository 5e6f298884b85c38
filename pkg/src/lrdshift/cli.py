"""Command-line front end.

Subcommands wire the library end to end: ``synth`` (sample a background
trace), ``detect`` (batch multiscale test over a file), ``map`` (SVG export
of a p-value map window), ``threshold`` (print a calibrated critical
value), ``eval`` (simulation study), ``stream`` (line-by-line detection on
stdin).

Exit codes: 0 success, 2 usage or input-validation error, 1 runtime error
(I/O and similar).  Diagnostics go to stderr; data goes to stdout or the
requested files only.  All randomness is seed-driven and reruns with the
same flags produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .detect import DetectionConfig, detect, flags_to_intervals
from .evaluate import ExperimentConfig, InjectionSpec, run_experiment
from .fgn import LrdModel, TimeSeries, estimate_hurst, synthesize_fgn
from .pyramid import ScaleConfig, StreamState
from .svgmap import render_pvalue_map_svg
from .thresholds import (
    ThresholdQuery,
    ThresholdResult,
    asymptotic_threshold,
    improved_threshold,
    single_scale_threshold,
)

__all__ = ["main"]

_KIND_BY_FLAG = {"improved": "monte_carlo", "asymptotic": "asymptotic", "single": "single_scale"}


def read_series(path, column: int | None = None) -> np.ndarray:
    """Parse a series file: one value per line, or a CSV column.

    A non-numeric first row is treated as a header and skipped.  With
    ``column`` (1-based), each line is split on commas and that field is
    used; other fields (e.g. timestamps) are ignored.
    """
    if column is not None and column < 1:
        raise ValueError("--column is 1-based and must be >= 1")
    values: list[float] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            field = line.split(",")[column - 1] if column is not None else line
            try:
                values.append(float(field))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"{path}: line {lineno}: cannot parse {line!r} as a number")
    if not values:
        raise ValueError(f"{path}: no numeric data found")
    return np.array(values)


def write_series(path, values: np.ndarray) -> None:
    with open(path, "w") as fh:
        for v in values:
            fh.write(repr(float(v)) + "\n")


def write_pvalue_csv(path, pvalues: np.ndarray) -> None:
    """Map CSV: first column is the scale index, then one column per position."""
    num_scales, n = pvalues.shape
    with open(path, "w") as fh:
        fh.write("scale," + ",".join(str(t) for t in range(1, n + 1)) + "\n")
        for k in range(1, num_scales + 1):
            cells = ["" if np.isnan(p) else repr(float(p)) for p in pvalues[k - 1]]
            fh.write(str(k) + "," + ",".join(cells) + "\n")


def read_pvalue_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (pvalues matrix, 1-based time labels)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "scale":
            raise ValueError(f"{path}: not a p-value map CSV (missing 'scale' header)")
        labels = np.array([int(t) for t in header[1:]])
        rows = []
        for lineno, raw in enumerate(fh, start=2):
            fields = raw.rstrip("\n").split(",")
            if len(fields) != len(labels) + 1:
                raise ValueError(f"{path}: line {lineno}: expected {len(labels) + 1} fields")
            rows.append([np.nan if f == "" else float(f) for f in fields[1:]])
    if not rows:
        raise ValueError(f"{path}: no map rows found")
    return np.array(rows), labels


def _threshold_from_args(args) -> ThresholdResult:
    kind = _KIND_BY_FLAG[args.threshold]
    if kind == "monte_carlo":
        return improved_threshold(
            ThresholdQuery(
                alpha=args.alpha,
                num_scales=args.scales,
                hurst=args.hurst,
                base=args.base,
                kind=kind,
                mc_reps=args.mc_reps,
                seed=args.seed,
            )
        )
    if kind == "asymptotic":
        return asymptotic_threshold(args.alpha, args.scales)
    return single_scale_threshold(args.alpha)


def cmd_synth(args) -> int:
    model = LrdModel(hurst=args.hurst, sigma=args.sigma)
    if args.n < 1:
        raise ValueError(f"--n must be >= 1, got {args.n}")
    series = synthesize_fgn(model, args.n, args.seed)
    write_series(args.out, series.values)
    return 0


def cmd_detect(args) -> int:
    values = read_series(args.input, args.column)
    if args.estimate_hurst:
        estimate = estimate_hurst(values)
        print(repr(estimate))
        if args.hurst is None:
            print(
                "rerun with an explicit --hurst value (e.g. the estimate above) "
                "to run detection",
                file=sys.stderr,
            )
            return 0
    if args.hurst is None:
        raise ValueError("--hurst is required (or use --estimate-hurst first)")
    scale_config = ScaleConfig(base=args.base, num_scales=args.scales, hurst=args.hurst)
    if len(values) < scale_config.max_window:
        raise ValueError(
            f"series has {len(values)} samples but the largest window is "
            f"{scale_config.max_window}; reduce --scales or --base"
        )
    threshold = _threshold_from_args(args)
    standardization = "provided" if args.mean is not None or args.std is not None else args.standardize
    config = DetectionConfig(
        scale_config=scale_config,
        threshold=threshold,
        method=args.method,
        standardization=standardization,
        mean=args.mean,
        std=args.std,
    )
    result = detect(TimeSeries(values), config)
    intervals = flags_to_intervals(result, args.gap_tolerance)
    payload = {
        "alpha": args.alpha,
        "base": args.base,
        "flagged_indices": [int(i) for i in result.flags],
        "hurst": args.hurst,
        "intervals": [
            {"start": iv.start, "end": iv.end, "peak_scale": iv.peak_scale} for iv in intervals
        ],
        "method": args.method,
        "scales": args.scales,
        "seed": args.seed,
        "threshold": threshold.value,
        "threshold_kind": threshold.kind,
        "threshold_se": threshold.mc_standard_error,
    }
    with open(args.out_flags, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.out_map:
        write_pvalue_csv(args.out_map, result.pvalues)
    return 0


def cmd_map(args) -> int:
    pvalues, labels = read_pvalue_csv(args.in_map)
    n = pvalues.shape[1]
    stop = n if args.to is None else args.to
    svg = render_pvalue_map_svg(pvalues, args.from_, stop, time_labels=labels)
    with open(args.out_svg, "w") as fh:
        fh.write(svg)
    return 0


def cmd_threshold(args) -> int:
    result = _threshold_from_args(args)
    print(
        json.dumps(
            {"value": result.value, "kind": result.kind, "se": result.mc_standard_error},
            sort_keys=True,
        )
    )
    return 0


def cmd_eval(args) -> int:
    if args.start is not None:
        start_kwargs = {"start": args.start}
    else:
        start_kwargs = {"start_range": args.start_range}
    if args.duration is not None:
        duration_kwargs = {"duration": args.duration}
    else:
        duration_kwargs = {"duration_mean": args.duration_mean}
    injection = InjectionSpec(delta=args.delta, **start_kwargs, **duration_kwargs)
    config = ExperimentConfig(
        sets=args.sets,
        sims_per_set=args.sims,
        n=args.n,
        hurst=args.hurst,
        injection=injection,
        alpha=args.alpha,
        num_scales=args.scales,
        base=args.base,
        method=args.method,
        mc_reps=args.mc_reps,
        seed=args.seed,
    )
    result = run_experiment(config)
    result.to_csv(args.out + ".csv")
    result.to_json(args.out + ".json")
    return 0


def cmd_stream(args) -> int:
    scale_config = ScaleConfig(base=args.base, num_scales=args.scales, hurst=args.hurst)
    if args.threshold_value is not None:
        critical = args.threshold_value
        if not critical > 0:
            raise ValueError("--threshold-value must be positive")
    else:
        critical = _threshold_from_args(args).value
    if (args.mean is None) != (args.std is None):
        raise ValueError("--mean and --std must be given together")
    if args.std is not None and not args.std > 0:
        raise ValueError("--std must be positive")
    state = StreamState(scale_config)
    index = 0
    for lineno, raw in enumerate(sys.stdin, start=1):
        line = raw.strip()
        if not line:
            print(f"warning: line {lineno}: empty line skipped", file=sys.stderr)
            continue
        try:
            sample = float(line)
        except ValueError:
            print(f"warning: line {lineno}: cannot parse {line!r}, skipped", file=sys.stderr)
            continue
        if args.mean is not None:
            sample = (sample - args.mean) / args.std
        column = state.push(sample)
        index += 1
        statistic, argmax_scale = 0.0, 0
        for scale, value in column:
            if abs(value) > statistic:
                statistic, argmax_scale = abs(value), scale
        if statistic > critical:
            if args.format == "jsonl":
                print(
                    json.dumps(
                        {"index": index, "statistic": statistic, "argmax_scale": argmax_scale},
                        sort_keys=True,
                    ),
                    flush=True,
                )
            else:
                print(f"{index},{statistic!r},{argmax_scale}", flush=True)
    return 0


def _add_threshold_flags(parser, include_single=False) -> None:
    choices = ["improved", "asymptotic"] + (["single"] if include_single else [])
    parser.add_argument("--threshold", choices=choices, default="improved",
                        help="threshold kind (default: improved)")
    parser.add_argument("--alpha", type=float, default=0.05, help="family-wise level")
    parser.add_argument("--mc-reps", type=int, default=10**6, dest="mc_reps",
                        help="Monte-Carlo replicates for the improved threshold")


def _add_scale_flags(parser) -> None:
    parser.add_argument("--scales", type=int, default=15, help="number of scales")
    parser.add_argument("--base", type=int, default=2, help="aggregation base")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrdshift",
        description="Multiscale level-shift anomaly detection for long-range-dependent series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="sample a background trace to a file")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="batch detection over a series file")
    p.add_argument("--in", dest="input", required=True, help="series file, one value per line")
    p.add_argument("--column", type=int, default=None,
                   help="1-based CSV column holding the values (other columns ignored)")
    p.add_argument("--hurst", type=float, default=None)
    p.add_argument("--estimate-hurst", action="store_true", dest="estimate_hurst",
                   help="print the aggregated-variance Hurst estimate; detection still "
                        "requires an explicit --hurst")
    _add_scale_flags(p)
    _add_threshold_flags(p)
    p.add_argument("--method", choices=["nowa", "swa"], default="nowa")
    p.add_argument("--standardize", choices=["none", "sample"], default="none")
    p.add_argument("--mean", type=float, default=None, help="pre-known mean (with --std)")
    p.add_argument("--std", type=float, default=None, help="pre-known std (with --mean)")
    p.add_argument("--gap-tolerance", type=int, default=0, dest="gap_tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-flags", required=True, dest="out_flags")
    p.add_argument("--out-map", default=None, dest="out_map")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("map", help="render a window of a p-value map CSV to SVG")
    p.add_argument("--in-map", required=True, dest="in_map")
    p.add_argument("--from", type=int, default=0, dest="from_",
                   help="first column offset (0-based, default 0)")
    p.add_argument("--to", type=int, default=None,
                   help="one past the last column offset (default: end)")
    p.add_argument("--out-svg", required=True, dest="out_svg")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("threshold", help="print a calibrated critical value as JSON")
    p.add_argument("--hurst", type=float, default=0.9)
    _add_scale_flags(p)
    p.add_argument("--kind", choices=["improved", "asymptotic", "single"], default="improved",
                   dest="threshold")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--mc-reps", type=int, default=10**6, dest="mc_reps")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("eval", help="simulation study: synthesize, inject, detect, score")
    p.add_argument("--sets", type=int, default=10)
    p.add_argument("--sims", type=int, default=100)
    p.add_argument("--n", type=int, default=2**15)
    p.add_argument("--hurst", type=float, default=0.9)
    _add_scale_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", choices=["nowa", "swa"], default="swa")
    p.add_argument("--mc-reps", type=int, default=10**6, dest="mc_reps")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--start", type=int, default=None, help="fixed 1-based shift start")
    p.add_argument("--start-range", type=int, default=2**14, dest="start_range",
                   help="uniform start range (used unless --start is given)")
    p.add_argument("--duration", type=int, default=None, help="fixed shift duration")
    p.add_argument("--duration-mean", type=float, default=4000.0, dest="duration_mean",
                   help="exponential duration mean (used unless --duration is given)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix; writes <out>.csv and <out>.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stream", help="line-by-line detection on stdin")
    p.add_argument("--hurst", type=float, required=True)
    _add_scale_flags(p)
    _add_threshold_flags(p)
    p.add_argument("--threshold-value", type=float, default=None, dest="threshold_value",
                   help="use this critical value instead of computing one")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mean", type=float, default=None)
    p.add_argument("--std", type=float, default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.set_defaults(func=cmd_stream)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
