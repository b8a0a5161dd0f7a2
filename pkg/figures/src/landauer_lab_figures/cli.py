"""Command-line interface: render figures from landauer-lab CSV files."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import io, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landauer-render",
        description="Render publication-style figures from landauer-lab CSV outputs.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    fig1 = sub.add_parser("fig1", help="fitted deviation-vs-temperature panels")
    fig1.add_argument("--trials", required=True, help="trials CSV")
    fig1.add_argument("--fits", required=True, help="fit CSV")
    fig1.add_argument("--out", required=True, help="output image path")

    bounds = sub.add_parser("bounds", help="bound-gap scatter with hull polygons")
    bounds.add_argument("--trials", required=True, help="trials CSV")
    bounds.add_argument("--hulls", required=True, help="hull CSV")
    bounds.add_argument("--out", required=True, help="output image path")
    return parser


def run(argv: Sequence[str]) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.kind == "fig1":
            render.render_fig1(args.trials, args.fits, args.out)
        else:
            render.render_bounds(args.trials, args.hulls, args.out)
    except (io.SchemaError, io.EmptyDataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
