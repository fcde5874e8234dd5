"""Command line: figviz --in sweep.csv --out fig3.png [--no-thresholds] [--errorbars]."""
from __future__ import annotations

import argparse
import sys

from .render import FigvizError, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figviz",
        description="Render overlap-vs-epsilon curves with detectability thresholds "
                    "from an attrisbm sweep CSV",
    )
    parser.add_argument("--in", dest="input_csv", required=True, help="sweep CSV path")
    parser.add_argument("--out", dest="output_image", required=True,
                        help="output image path (.png, .pdf, .svg, ...)")
    parser.add_argument("--no-thresholds", action="store_true",
                        help="skip the dashed threshold lines")
    parser.add_argument("--errorbars", action="store_true",
                        help="draw one-standard-deviation bars over seeds")
    parser.add_argument("--group-key", default="eta")
    parser.add_argument("--x", default="epsilon")
    parser.add_argument("--y", default="overlap")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        input_csv=args.input_csv,
        output_image=args.output_image,
        group_key=args.group_key,
        x=args.x,
        y=args.y,
        threshold_lines=not args.no_thresholds,
        errorbars=args.errorbars,
    )
    try:
        result = render(spec)
    except (FigvizError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lines = ", ".join(
        f"{g:g}: {s.threshold:.4f}" if s.threshold is not None else f"{g:g}: none"
        for g, s in sorted(result.groups.items())
    )
    print(f"wrote {result.output_image} ({len(result.groups)} curves; thresholds {lines})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
