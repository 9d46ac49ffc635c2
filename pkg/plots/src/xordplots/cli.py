"""One command per figure kind:

    xordlab-plots <kind> --input FILE [--input FILE ...] --out IMAGE.png

Kinds: filter-scatter, error-vs-channels, angle-histogram,
accuracy-vs-trainsize.  Exit 0 on success, 2 on usage or schema errors.
"""

import argparse
import sys

from .io import SchemaError
from .render import FIGURE_KINDS, FigureSpec, render


def build_parser():
    parser = argparse.ArgumentParser(prog="xordlab-plots", description=__doc__)
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in FIGURE_KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--input", action="append", required=True,
                       help="schema-tagged CSV (repeatable)")
        p.add_argument("--out", required=True, help="output PNG path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(FigureSpec(tuple(args.input), args.kind, args.out))
    except (SchemaError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
