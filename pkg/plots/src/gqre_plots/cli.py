"""gqre-plots: render benchmark figures from trajectory CSVs."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .render import BANDS, FORMATS, METRICS, PlotSpec, render_gap_curves


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gqre-plots",
        description="Figures from gqre trajectory CSVs (no solving, just drawing).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", help="gap vs iteration, one figure per game")
    p.add_argument("--csv", action="append", required=True,
                   help="trajectory CSV; repeat to concatenate several")
    p.add_argument("--metric", choices=list(METRICS), default="nash_gap")
    p.add_argument("--out-dir", help="default: $GQRE_OUT_DIR/plots or out/plots")
    p.add_argument("--format", dest="fmt", choices=list(FORMATS), default="png")
    p.add_argument("--band", choices=list(BANDS), default="std")
    p.add_argument("--linear-y", action="store_true",
                   help="linear gap axis (default is log scale)")
    p.add_argument("--dump-table", action="store_true",
                   help="write the aggregated numbers next to each figure")
    p.set_defaults(func=cmd_report)
    return parser


def cmd_report(args) -> int:
    import matplotlib

    matplotlib.use("Agg")  # batch tool; never needs a display
    out_dir = Path(args.out_dir) if args.out_dir else \
        Path(os.environ.get("GQRE_OUT_DIR", "out")) / "plots"
    spec = PlotSpec(csv_paths=args.csv, metric=args.metric, out_dir=out_dir,
                    fmt=args.fmt, band=args.band, log_y=not args.linear_y,
                    dump_table=args.dump_table)
    for path in render_gap_curves(spec):
        print(path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
