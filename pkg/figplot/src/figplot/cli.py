"""figplot command line: render panels from walk-curve and sweep CSVs."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, InputError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplot",
        description="Render the walk-search figure from CSV sweep outputs")
    parser.add_argument("--top", help="curve CSV (time panel)")
    parser.add_argument("--bottom", help="sweep CSV (peak panel)")
    parser.add_argument("--out", default="fig.png", help="output image path")
    parser.add_argument("--panel", choices=["top", "bottom", "both"],
                        help="panel selection (default: whatever inputs are given)")
    parser.add_argument("--cmap-start", default="#1f50c8")
    parser.add_argument("--cmap-end", default="#000000")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    panels = args.panel
    if panels is None:
        if args.top and args.bottom:
            panels = "both"
        elif args.top:
            panels = "top"
        elif args.bottom:
            panels = "bottom"
        else:
            print("error: need --top and/or --bottom input", file=sys.stderr)
            return 2
    try:
        spec = FigureSpec(top_csv=args.top, bottom_csv=args.bottom,
                          out_path=args.out, panels=panels,
                          cmap_start=args.cmap_start, cmap_end=args.cmap_end)
        counts = render(spec)
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = ", ".join(f"{v} {k}" for k, v in counts.items())
    print(f"wrote {args.out} ({summary})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
