"""Command line wrapper: render <kind> <csv> <out.png> [--title T]."""

from __future__ import annotations

import argparse
import sys

from .figures import EmptyDataError, FigureSpec, KIND_SCHEMAS, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="maxreg-render",
        description="Render a static figure from a maxreg CSV artifact.",
    )
    parser.add_argument("kind", choices=sorted(KIND_SCHEMAS))
    parser.add_argument("csv", help="input CSV (schema comment in row 1)")
    parser.add_argument("out", help="output image path (png, svg, pdf)")
    parser.add_argument("--title", help="figure title override")
    args = parser.parse_args(argv)
    try:
        result = render(FigureSpec(kind=args.kind, csv_path=args.csv,
                                   out_path=args.out, title=args.title))
    except (SchemaError, EmptyDataError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    extras = ", ".join(f"{k}={v}" for k, v in result.metadata.items())
    print(f"wrote {result.out_path} ({result.n_points} points"
          + (f"; {extras}" if extras else "") + ")")
    return 0


if __name__ == "__main__":
    sys.exit(main())
