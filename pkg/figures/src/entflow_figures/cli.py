"""``figures render --spec <file>``: render one figure from a JSON spec."""

from __future__ import annotations

import argparse
import json
import sys

from .io import FiguresError
from .render import load_spec, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figures")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render")
    p.add_argument("--spec", required=True, help="figure spec (JSON)")
    p.add_argument("--print-meta", action="store_true",
                   help="print the structural metadata as JSON")
    args = ap.parse_args(argv)

    try:
        spec = load_spec(args.spec)
        meta = render(spec)
    except FiguresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.print_meta:
        print(json.dumps(meta, sort_keys=True))
    else:
        print(f"wrote {spec.out} ({spec.kind})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
