"""Command-line interface: estimation, benchmarking, runtime study, projection.

Exit codes: 0 success, 2 input error, 3 solver degeneracy, 4 outlier-
rejection breakdown.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import ExitStack

import numpy as np

from . import bench, io
from .aor import estimate_pose_aor
from .errors import InputDataError, PnlError, TooFewInliers
from .geometry import (
    ImageLine2D,
    line_projection_matrix,
    plucker_from_endpoints,
    project_line,
)
from .solver import estimate_camera_pose

EXIT_INPUT_ERROR = 2
EXIT_DEGENERATE = 3
EXIT_BREAKDOWN = 4


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pnl",
        description="Camera pose estimation from 3D/2D line correspondences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate a pose from line files")
    est.add_argument("--lines3d", required=True, help="3D line CSV file")
    est.add_argument("--lines2d", required=True, help="2D line CSV file")
    est.add_argument("--intrinsics", help="intrinsics JSON file")
    est.add_argument("--aor", action="store_true",
                     help="reject mismatched correspondences algebraically")
    est.add_argument("--no-prenorm", action="store_true",
                     help="skip data prenormalization (plain estimator only)")
    est.add_argument("--output", help="pose JSON output file (default stdout)")

    ben = sub.add_parser("benchmark", help="synthetic Monte Carlo sweep")
    ben.add_argument("--n", type=_int_list, required=True,
                     help="comma-separated line counts")
    ben.add_argument("--sigma", type=_float_list, default=[2.0],
                     help="comma-separated pixel noise levels")
    ben.add_argument("--trials", type=int, default=1000)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--aor", action="store_true")
    ben.add_argument("--outlier-fraction", type=_float_list, default=[0.0])
    ben.add_argument("--outlier-sigma", type=float, default=100.0)
    ben.add_argument("--csv", help="records CSV output file (default stdout)")
    ben.add_argument("--summary", help="summary JSON output file")
    ben.add_argument("--no-plot", action="store_true",
                     help="skip figure rendering next to the CSV")

    run = sub.add_parser("runtime", help="solver runtime study")
    run.add_argument("--n", type=_int_list, required=True)
    run.add_argument("--trials", type=int, default=1000)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--sigma", type=float, default=2.0)
    run.add_argument("--csv", help="records CSV output file (default stdout)")
    run.add_argument("--summary", help="summary JSON output file")
    run.add_argument("--no-plot", action="store_true")

    proj = sub.add_parser("project", help="project 3D lines through a pose")
    proj.add_argument("--pose", required=True, help="pose JSON file")
    proj.add_argument("--lines3d", required=True, help="3D line CSV file")
    proj.add_argument("--intrinsics",
                      help="emit pixel-frame lines through these intrinsics")
    proj.add_argument("--output", help="2D line CSV output file (default stdout)")
    return parser


def _load_intrinsics(path):
    return io.read_intrinsics_json(path) if path else None


def _cmd_estimate(args):
    intrinsics = _load_intrinsics(args.intrinsics)
    correspondences = io.parse_correspondences(
        args.lines3d, args.lines2d, intrinsics
    )
    if args.aor:
        result = estimate_pose_aor(correspondences)
        payload = io.solution_to_dict(result.solution, aor_result=result)
    else:
        solution = estimate_camera_pose(
            correspondences, prenormalize=not args.no_prenorm
        )
        payload = io.solution_to_dict(solution)
    text = json.dumps(payload, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _write_records(records, args, figure_kind):
    with ExitStack() as stack:
        if args.csv:
            fh = stack.enter_context(open(args.csv, "w"))
        else:
            fh = sys.stdout
        bench.write_records_csv(records, fh)
    summary = bench.summarize(records)
    summary_text = json.dumps(summary, indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary_text + "\n")
    elif args.csv:
        print(summary_text)
    else:
        print(summary_text, file=sys.stderr)
    if args.csv and not args.no_plot:
        from . import plots  # matplotlib only when figures are wanted

        stem = args.csv[:-4] if args.csv.endswith(".csv") else args.csv
        if figure_kind == "errors":
            paths = plots.save_error_figures(records, stem)
            paths.append(plots.save_runtime_figure(records, stem))
        else:
            paths = [plots.save_runtime_figure(records, stem)]
        for path in paths:
            print(f"wrote {path}", file=sys.stderr)


def _cmd_benchmark(args):
    method = "aor" if args.aor else "plain"
    records = []
    for n in args.n:
        for sigma in args.sigma:
            for fraction in args.outlier_fraction:
                config = bench.BenchConfig(
                    n_lines=n, sigma_p=sigma, outlier_fraction=fraction,
                    outlier_sigma=args.outlier_sigma, trials=args.trials,
                    seed=args.seed,
                )
                records.extend(bench.run_monte_carlo(config, method))
    _write_records(records, args, "errors")
    return 0


def _cmd_runtime(args):
    records = []
    for n in args.n:
        config = bench.BenchConfig(
            n_lines=n, sigma_p=args.sigma, trials=args.trials, seed=args.seed
        )
        records.extend(bench.run_monte_carlo(config, "plain"))
    _write_records(records, args, "runtime")
    return 0


def _cmd_project(args):
    pose = io.read_pose_json(args.pose)
    intrinsics = _load_intrinsics(args.intrinsics)
    schema, rows = io._read_rows(
        args.lines3d, (io._SCHEMA_3D_ENDPOINTS, io._SCHEMA_3D_PLUCKER)
    )
    projection = line_projection_matrix(pose)
    ids, lines = [], []
    for ident, vals, optional, _line_number in rows:
        if schema is io._SCHEMA_3D_ENDPOINTS:
            line3d = plucker_from_endpoints(
                [vals["ax"], vals["ay"], vals["az"], optional.get("aw", 1.0)],
                [vals["bx"], vals["by"], vals["bz"], optional.get("bw", 1.0)],
            )
        else:
            line3d = io._canonical_plucker(
                np.array([vals["ux"], vals["uy"], vals["uz"]]),
                np.array([vals["vx"], vals["vy"], vals["vz"]]),
            )
        line2d = project_line(projection, line3d)
        if intrinsics is not None:
            line2d = ImageLine2D(io.line_to_pixel_coeffs(line2d, intrinsics))
        ids.append(ident)
        lines.append(line2d)
    if args.output:
        with open(args.output, "w") as fh:
            io.write_lines2d_csv(ids, lines, fh)
    else:
        io.write_lines2d_csv(ids, lines, sys.stdout)
    return 0


_COMMANDS = {
    "estimate": _cmd_estimate,
    "benchmark": _cmd_benchmark,
    "runtime": _cmd_runtime,
    "project": _cmd_project,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InputDataError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except TooFewInliers as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except PnlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


def entry():
    sys.exit(main())
