"""Command-line driver: the ``plot`` subcommand."""

from __future__ import annotations

import argparse
import sys

from .charts import CHART_KINDS, DEFAULT_HALF_LIFE, ChartDataError, ChartSpec, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankedcucb-viz",
        description="Render charts from rankedcucb harness CSV output",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot", help="render one chart from a CSV file")
    p.add_argument("--kind", required=True, choices=CHART_KINDS)
    p.add_argument("--in", dest="csv_path", required=True, help="input CSV path")
    p.add_argument("--out", dest="out_path", required=True, help="output image path")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="only plot streams with this trade-off weight")
    p.add_argument("--half-life", type=float, default=DEFAULT_HALF_LIFE,
                   help="smoothing half-life in rounds")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = ChartSpec(
            csv_path=args.csv_path,
            kind=args.kind,
            out_path=args.out_path,
            lam=args.lam,
            half_life=args.half_life,
        )
        out = render(spec)
    except ChartDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
