import argparse
import sys

from .dialect import SchemaError, read_table


def main(argv=None):
    parser = argparse.ArgumentParser(prog="figure-kit")
    sub = parser.add_subparsers(dest="command", required=True)
    render = sub.add_parser("render", help="check inputs and render one figure")
    render.add_argument("--figure", type=int, choices=[2, 3, 4, 5], required=True)
    render.add_argument("--in", dest="inputs", nargs="+", required=True)
    render.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    try:
        tables = [read_table(p) for p in args.inputs]
    except (OSError, SchemaError, ValueError) as e:
        print(f"figure-kit: {e}", file=sys.stderr)
        return 2
    for path, t in zip(args.inputs, tables):
        print(f"{path}: {len(t.rows)} rows, axis {t.axis}, scenario {t.metadata.get('scenario', '?')}", file=sys.stderr)
    print("figure-kit: inputs are valid; rendering is not included in this build", file=sys.stderr)
    return 3


if __name__ == "__main__":
    sys.exit(main())
