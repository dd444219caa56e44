"""Command-line interface: ``facekf {run-det,run-stoch,synth,validate,report}``.

Exit status is 0 on success, 2 for usage, configuration, parse and I/O
errors, and 3 for numeric failures inside a filter.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .dataio import (
    DEFAULT_POINTS,
    ESTIMATES_HEADER,
    RESULTS_HEADER,
    SynthSpec,
    discover_files,
    fmt,
    load_trajectory,
    parse_landmark_file,
    read_table,
    synthetic_trajectory,
    write_estimates_csv,
    write_results_csv,
    write_results_json,
    write_trajectory,
)
from .errors import FaceKFError, LandmarkFileError, NumericError
from .experiments import ExperimentConfig, compare_filters, run_deterministic, run_stochastic

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
COORDS = ("x", "y", "z")


class UsageError(Exception):
    """Bad flag combination detected after argparse."""


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--frames", nargs="+", metavar="FILE", help="landmark files in frame order")
    p.add_argument("--dir", help="directory of landmark files (natural filename order)")
    p.add_argument("--glob", default="*.txt", help="filename pattern used with --dir")
    p.add_argument("--points", type=int, default=DEFAULT_POINTS, help="landmarks per file")


def _add_experiment(p: argparse.ArgumentParser, stochastic: bool) -> None:
    d = ExperimentConfig()
    _add_inputs(p)
    p.add_argument("--user", help="user label; parent directory name of the first file when omitted")
    p.add_argument("--out", help="results file; stdout when omitted")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="results format")
    p.add_argument("--estimates", help="also write per-landmark truth/estimate coordinates to this CSV")
    p.add_argument("--dt", type=float, default=d.dt, help="time step between frames (s)")
    p.add_argument("--lambda", dest="lam", metavar="LAMBDA", type=float, default=d.lam, help="UKF sigma-point spread lambda")
    p.add_argument("--q-det", type=float, default=d.q_det, help="process noise floor (mm^2)")
    p.add_argument("--r-det", type=float, default=d.r_det, help="measurement noise floor (mm^2)")
    p.add_argument("--initial-cov-scale", type=float, default=d.initial_cov_scale, help="P0 = scale * I (mm^2)")
    if stochastic:
        p.add_argument("--sigma-velocity", type=float, default=d.sigma_velocity, help="random velocity std (mm/s)")
        p.add_argument("--sigma-process", type=float, default=d.sigma_process, help="process noise std (mm)")
        p.add_argument("--sigma-measurement", type=float, default=d.sigma_measurement, help="measurement noise std (mm)")
        p.add_argument("--realizations", type=int, default=d.realizations, help="Monte Carlo realizations")
        p.add_argument("--seed", type=int, default=d.seed, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    fmt_cls = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="facekf", description=__doc__.splitlines()[0], formatter_class=fmt_cls)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run-det", help="noise-free EKF/UKF tracking", formatter_class=fmt_cls)
    _add_experiment(p, stochastic=False)
    p.set_defaults(func=cmd_run_det)

    p = sub.add_parser("run-stoch", help="Monte Carlo EKF/UKF tracking with synthetic noise", formatter_class=fmt_cls)
    _add_experiment(p, stochastic=True)
    p.set_defaults(func=cmd_run_stoch)

    p = sub.add_parser("synth", help="write a synthetic drifting landmark trajectory", formatter_class=fmt_cls)
    s = SynthSpec()
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--points", type=int, default=s.n_points)
    p.add_argument("--frames", type=int, default=s.n_frames)
    p.add_argument("--seed", type=int, default=s.seed)
    p.add_argument("--dt", type=float, default=s.dt)
    p.add_argument("--amplitude", type=float, default=s.amplitude, help="drift amplitude per axis (mm)")
    p.add_argument("--frequency", type=float, default=s.frequency, help="nominal drift frequency (Hz)")
    p.add_argument("--user", default="synthetic")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="check landmark files without running filters", formatter_class=fmt_cls)
    _add_inputs(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="tidy series,frame,value table for plotting", formatter_class=fmt_cls)
    p.add_argument("--results", required=True, help="results CSV from run-det/run-stoch")
    p.add_argument("--estimates", help="estimates CSV written with --estimates")
    p.add_argument("--landmark", type=int, help="0-based landmark index to trace (needs --estimates)")
    p.add_argument("--coord", choices=COORDS, default="x", help="coordinate to trace")
    p.add_argument("--out", help="output CSV; stdout when omitted")
    p.set_defaults(func=cmd_report)
    return parser


def _input_paths(args) -> list[Path]:
    if args.frames and args.dir:
        raise UsageError("use either --frames or --dir, not both")
    if args.frames:
        return [Path(f) for f in args.frames]
    if args.dir:
        if not Path(args.dir).is_dir():
            raise UsageError(f"not a directory: {args.dir}")
        paths = discover_files(args.dir, args.glob)
        if not paths:
            raise UsageError(f"no files matching {args.glob!r} in {args.dir}")
        return paths
    raise UsageError("no input: pass --frames FILE... or --dir DIR")


def _config(args, mode: str) -> ExperimentConfig:
    d = ExperimentConfig()
    return ExperimentConfig(
        mode=mode,
        dt=args.dt,
        lam=args.lam,
        q_det=args.q_det,
        r_det=args.r_det,
        sigma_velocity=getattr(args, "sigma_velocity", d.sigma_velocity),
        sigma_process=getattr(args, "sigma_process", d.sigma_process),
        sigma_measurement=getattr(args, "sigma_measurement", d.sigma_measurement),
        realizations=getattr(args, "realizations", d.realizations),
        seed=getattr(args, "seed", d.seed),
        initial_cov_scale=args.initial_cov_scale,
    )


def _run(args, mode: str) -> int:
    config = _config(args, mode)
    paths = _input_paths(args)
    trajectory = load_trajectory(paths, dt=config.dt, user_label=args.user, n_points=args.points)
    runner = run_deterministic if mode == "deterministic" else run_stochastic
    ekf, ukf = runner(trajectory, config)

    meta = {"command": args.command, "user": trajectory.user_label, "frames": len(trajectory),
            "points": trajectory.n_points, **config.as_metadata()}
    writer = write_results_json if args.format == "json" else write_results_csv
    if args.out:
        writer([ekf, ukf], args.out, meta)
        summary_stream = sys.stdout
    else:
        writer([ekf, ukf], sys.stdout, meta)
        summary_stream = sys.stderr
    if args.estimates:
        write_estimates_csv(trajectory, [ekf, ukf], args.estimates)
    print(f"[{trajectory.user_label}] {mode}, {len(trajectory)} frames", file=summary_stream)
    print(compare_filters(ekf, ukf).summary(), file=summary_stream)
    return EXIT_OK


def cmd_run_det(args) -> int:
    return _run(args, "deterministic")


def cmd_run_stoch(args) -> int:
    return _run(args, "stochastic")


def cmd_synth(args) -> int:
    spec = SynthSpec(n_points=args.points, n_frames=args.frames, seed=args.seed, dt=args.dt,
                     amplitude=args.amplitude, frequency=args.frequency)
    trajectory = synthetic_trajectory(spec, user_label=args.user)
    meta = {"seed": spec.seed, "amplitude": spec.amplitude, "frequency": spec.frequency}
    paths = write_trajectory(trajectory, args.out, meta)
    print(f"wrote {len(paths)} frames of {spec.n_points} points to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    paths = _input_paths(args)
    bad = 0
    for path in paths:
        try:
            with open(path, encoding="utf-8") as fh:
                parse_landmark_file(fh, args.points)
        except LandmarkFileError as err:
            err.path = str(path)
            print(f"ERROR {err}")
            bad += 1
        except OSError as err:
            print(f"ERROR {path}: {err.strerror or err}")
            bad += 1
        else:
            print(f"OK {path}")
    print(f"{len(paths) - bad}/{len(paths)} files valid")
    return EXIT_OK if bad == 0 else EXIT_USAGE


def cmd_report(args) -> int:
    try:
        results = read_table(args.results, RESULTS_HEADER)
    except ValueError as err:
        raise UsageError(f"malformed results file {args.results}: {err}") from None
    out_rows = []
    series: dict[str, list] = {}
    for row in results.rows:
        try:
            frame = int(row["frame"])
            mse, mae = float(row["mse"]), float(row["mae"])
        except ValueError:
            raise UsageError(f"malformed results file {args.results}: bad row {row}") from None
        series.setdefault(f"{row['user']}/{row['filter']}/mse", []).append((frame, mse))
        series.setdefault(f"{row['user']}/{row['filter']}/mae", []).append((frame, mae))

    if args.landmark is not None:
        if not args.estimates:
            raise UsageError("--landmark requires --estimates")
        try:
            est = read_table(args.estimates, ESTIMATES_HEADER)
            n_points = 1 + max(int(r["landmark"]) for r in est.rows) if est.rows else 0
        except ValueError as err:
            raise UsageError(f"malformed estimates file {args.estimates}: {err}") from None
        if not 0 <= args.landmark < n_points:
            raise UsageError(f"--landmark {args.landmark} out of range: data has {n_points} landmarks (0..{n_points - 1})")
        for row in est.rows:
            if int(row["landmark"]) == args.landmark:
                key = f"{row['user']}/{row['series']}/landmark{args.landmark}/{args.coord}"
                series.setdefault(key, []).append((int(row["frame"]), float(row[args.coord])))

    for name in sorted(series):
        for frame, value in sorted(series[name]):
            out_rows.append((name, frame, fmt(value)))

    stream = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(("series", "frame", "value"))
        writer.writerows(out_rows)
    finally:
        if args.out:
            stream.close()
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as err:
        print(f"facekf: numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as err:
        print(f"facekf: no such file: {err.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, FaceKFError, ValueError, OSError) as err:
        print(f"facekf: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
