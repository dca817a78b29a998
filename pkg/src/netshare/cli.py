"""Command-line entry point.

    netshare run --config fig2a.cfg [--seed S] [--realizations N] [--out DIR]
    netshare validate [--tolerance T]
    netshare curve --scenario full-selective --theta-min -10 --theta-max 20 --step 1

Exit codes: 0 success, 1 failed validation, 2 invalid configuration or
arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _kernels, analytic
from .config import ConfigError, load_config
from .simulator import coverage_from_record, rate_stats_from_record, simulate
from .validation import analytic_curve, analytic_mean_rate, has_closed_form, run_validation

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CURVE_SCENARIOS = {
    "none": ("none", "flat"),
    "baseline": ("none", "flat"),
    "infrastructure": ("infrastructure", "flat"),
    "spectrum": ("spectrum", "flat"),
    "spectrum-flat": ("spectrum", "flat"),
    "spectrum-selective": ("spectrum", "selective"),
    "full": ("full", "flat"),
    "full-flat": ("full", "flat"),
    "full-selective": ("full", "selective"),
}

RATE_COLUMNS = ["scenario", "mean", "std_err", "p5", "p50", "p95", "analytic_mean", "n_realizations"]


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fmt(v) -> str:
    return "" if v is None else f"{v:.6g}"


def _rates_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RATE_COLUMNS)
    for name, stats, an in rows:
        w.writerow([name, _fmt(stats.mean), _fmt(stats.std_error), _fmt(stats.p5), _fmt(stats.p50),
                    _fmt(stats.p95), _fmt(an), stats.n_realizations])
    return buf.getvalue()


def _gnuplot(name: str, curves) -> str:
    lines = [
        f"# coverage curves for {name}; run with: gnuplot -p plot.gp",
        "set datafile separator ','",
        "set key bottom left",
        "set xlabel 'SINR threshold (dB)'",
        "set ylabel 'coverage probability'",
        "set yrange [0:1]",
        "set grid",
    ]
    parts = []
    for fname, label, analytic_curve_ in curves:
        style = "with lines dt 2" if analytic_curve_ else "with yerrorbars pt 7 ps 0.5"
        cols = "1:2" if analytic_curve_ else "1:2:3"
        parts.append(f"'{fname}' using {cols} skip 1 {style} title '{label}'")
    if parts:
        lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def run_experiment(config, log=print) -> dict:
    """Run every scenario of ``config``; returns the manifest written to disk."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files, plotted, rate_rows, scen_meta = {}, [], [], []

    def emit(fname: str, text: str):
        (out / fname).write_text(text, encoding="utf-8", newline="")
        files[fname] = _sha256(text.encode("utf-8"))

    for sc in config.scenarios:
        log(f"[{config.name}] {sc.name}: {config.realizations} realisations ({_kernels.BACKEND})")
        record = simulate(sc, config.realizations, config.seed, config.workers)
        meta = {"name": sc.name, **sc.describe(), "resampled": record.resampled}
        if sc.pooled and sc.coordination_radius > 0:
            meta["excluded_fraction"] = record.excluded_fraction
        scen_meta.append(meta)
        closed = config.analytic and has_closed_form(sc)
        if "coverage" in config.kinds:
            mc = coverage_from_record(record, config.thresholds_db, sc, config.seed)
            emit(f"{sc.name}_mc.csv", mc.to_csv())
            plotted.append((f"{sc.name}_mc.csv", f"{sc.name} (MC)", False))
            if closed:
                emit(f"{sc.name}_analytic.csv", analytic_curve(sc, config.thresholds_db).to_csv())
                plotted.append((f"{sc.name}_analytic.csv", f"{sc.name} (analytic)", True))
        if "rates" in config.kinds:
            stats = rate_stats_from_record(record, sc)
            rate_rows.append((sc.name, stats, analytic_mean_rate(sc) if closed else None))

    if rate_rows:
        emit("rates.csv", _rates_csv(rate_rows))
    if config.output_format == "csv+gnuplot" and plotted:
        emit("plot.gp", _gnuplot(config.name, plotted))

    manifest = {
        "experiment": config.name,
        "config_sha256": _sha256(config.source_text.encode("utf-8")),
        "seed": config.seed,
        "realizations": config.realizations,
        "workers": config.workers,
        "code_version": __version__,
        "backend": _kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "theta_db": [float(t) for t in config.thresholds_db],
        "scenarios": scen_meta,
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def _cmd_run(args) -> int:
    config = load_config(args.config).with_overrides(args.seed, args.realizations, args.out, args.workers)
    if config.realizations < 1:
        raise ConfigError("realizations must be >= 1")
    manifest = run_experiment(config, log=lambda msg: print(msg, file=sys.stderr))
    print(f"wrote {len(manifest['files'])} files to {config.output_dir}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    if not args.tolerance >= 0:
        raise ConfigError(f"tolerance must be non-negative, got {args.tolerance}")
    report = run_validation(args.tolerance, args.realizations, args.seed, args.workers)
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for row in report["scenarios"]:
        flag = "ok  " if row["passed"] else "FAIL"
        print(f"{flag} {row['scenario']:<20} max |MC - analytic| = {row['max_deviation']:.4f} "
              f"at {row['worst_theta_db']:g} dB", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION_FAILED


def _cmd_curve(args) -> int:
    if args.scenario not in CURVE_SCENARIOS:
        raise ConfigError(f"unknown scenario {args.scenario!r}; choose from {', '.join(CURVE_SCENARIOS)}")
    if not args.step > 0 or args.theta_max < args.theta_min:
        raise ConfigError("need --step > 0 and --theta-max >= --theta-min")
    sharing, mode = CURVE_SCENARIOS[args.scenario]
    n = int(round((args.theta_max - args.theta_min) / args.step))
    grid = np.round(args.theta_min + args.step * np.arange(n + 1), 10)
    try:
        dens = tuple(float(v) for v in args.densities.split(","))
        ops = analytic.OperatorSet(dens)
        noise = analytic.NoiseModel.from_power(args.noise)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    curve = analytic.coverage_curve(sharing, mode, grid, ops, args.operator, args.alpha, noise)
    text = curve.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netshare", description="Coverage and rate under inter-operator sharing.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True, help="config path, or the name of a shipped config")
    r.add_argument("--seed", type=int)
    r.add_argument("--realizations", type=int)
    r.add_argument("--out", help="output directory")
    r.add_argument("--workers", type=int)
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="cross-check Monte-Carlo against closed forms")
    v.add_argument("--tolerance", type=float, default=0.015)
    v.add_argument("--realizations", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--report", help="write the JSON report here instead of stdout")
    v.set_defaults(func=_cmd_validate)

    c = sub.add_parser("curve", help="analytic coverage curve as CSV")
    c.add_argument("--scenario", required=True, help=", ".join(CURVE_SCENARIOS))
    c.add_argument("--theta-min", type=float, required=True)
    c.add_argument("--theta-max", type=float, required=True)
    c.add_argument("--step", type=float, required=True)
    c.add_argument("--densities", default="1,1", help="comma-separated operator densities")
    c.add_argument("--operator", type=int, default=0, help="index of the user's operator")
    c.add_argument("--alpha", type=float, default=4.0)
    c.add_argument("--noise", type=float, default=0.0, help="noise power W")
    c.add_argument("--out", help="CSV path (default stdout)")
    c.set_defaults(func=_cmd_curve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # invalid parameters that slipped past config checks
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
