"""Command line entry point: ``apident identify`` and ``apident synth``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import DataFormatError, MethodError, ReportError
from .identify import IdentifyConfig
from .pipeline import GridConfig, load_csv, report_json, run_identification, synth_command

EXIT_OK, EXIT_IO, EXIT_METHOD = 0, 1, 2


def _grid_triplet(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be min:max:step")
    return tuple(float(p) if p else None for p in parts)


def _names(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apident", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ident = sub.add_parser("identify", help="identify control channels from a CSV record")
    ident.add_argument("--input", required=True, help="CSV file with a leading 't' column")
    ident.add_argument("--inputs", required=True, type=_names, help="comma-separated input columns")
    ident.add_argument("--output", required=True, help="output column")
    ident.add_argument("--channel", action="append", default=[],
                       help="channel as <input>:<output>; repeatable (default: first input)")
    ident.add_argument("--grid", type=_grid_triplet, help="spectrum grid min:max:step in rad/s")
    ident.add_argument("--peak-rel-threshold", type=float, default=0.05)
    ident.add_argument("--delta-mult", type=float, default=1.0)
    ident.add_argument("--no-refine", action="store_true", help="use raw spectral peak positions")
    ident.add_argument("--projection", choices=("mean", "fit"), default="mean",
                       help="Fourier exponents from the record mean or from a joint harmonic fit")
    ident.add_argument("--min-order", type=int, default=1)
    ident.add_argument("--max-order", type=int, default=10)
    ident.add_argument("--consistency-tol", type=float, default=1e-3)
    ident.add_argument("--condition-cap", type=float, default=1e10)
    ident.add_argument("--p-a", type=int, choices=(0, 1, 2), help="override the astatism order")
    ident.add_argument("--astatism-vote", action="store_true",
                       help="majority vote over the three lowest matched frequencies")
    ident.add_argument("--report", help="write the JSON report here (default: stdout)")

    synth = sub.add_parser("synth", help="generate a synthetic dataset and its ground truth")
    synth.add_argument("--config", required=True, help="JSON synth configuration")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="CSV file to write")
    synth.add_argument("--manifest", required=True, help="JSON ground-truth manifest to write")
    return parser


def _identify(args) -> int:
    try:
        dataset = load_csv(args.input)
    except (OSError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    lo, hi, step = args.grid or (None, None, None)
    grid = GridConfig(lo, hi, step, args.peak_rel_threshold, args.delta_mult,
                      refine=not args.no_refine, projection=args.projection)
    config = IdentifyConfig(min_order=args.min_order, max_order=args.max_order,
                            consistency_tol=args.consistency_tol, condition_cap=args.condition_cap,
                            p_a=args.p_a, astatism_vote=args.astatism_vote)
    channels = args.channel or [f"{args.inputs[0]}:{args.output}"]
    reports, status = [], EXIT_OK
    for spec in channels:
        src, _, dst = spec.partition(":")
        dst = dst or args.output
        try:
            reports.append(run_identification(dataset, args.inputs, dst, src, grid, config))
        except KeyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        except MethodError as exc:
            print(f"error: {spec}: {exc}", file=sys.stderr)
            if getattr(exc, "report", None) is not None:
                reports.append(exc.report)
            status = EXIT_METHOD
    if reports:
        body = reports[0] if len(reports) == 1 else reports
        try:
            text = report_json(body)
        except ReportError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        try:
            if args.report:
                with open(args.report, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    for r in reports:
        if r.coefficients is not None:
            print(f"{r.channel}: p_a={r.p_a} order={r.order} q={len(r.matched_frequencies)}", file=sys.stderr)
    return status


def _synth(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
        synth_command(config, args.seed, args.out, args.manifest)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MethodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METHOD
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "identify":
        return _identify(args)
    return _synth(args)


if __name__ == "__main__":
    sys.exit(main())
