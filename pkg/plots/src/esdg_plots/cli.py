"""Command line entry: plots <figure-kind> --csv <paths...> --out <file>."""

import argparse
import sys

from esdg_plots.csvio import PlotDataError
from esdg_plots.figures import KINDS, FigureSpec, render


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--csv", nargs="+", required=True, help="input CSV path(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default="")
    parser.add_argument("--x-col", default="", help="x column override")
    parser.add_argument("--y-col", nargs="*", default=(), help="y column override(s)")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        csv_paths=tuple(args.csv),
        out_path=args.out,
        title=args.title,
        x_col=args.x_col,
        y_cols=tuple(args.y_col),
    )
    try:
        meta = render(spec)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = " ".join(f"{k}={v}" for k, v in meta.items() if k != "kind")
    print(f"wrote {args.out} ({summary})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
