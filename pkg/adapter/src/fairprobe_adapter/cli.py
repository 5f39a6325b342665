"""Launch entry point: fairprobe-adapter --model <spec> [--train <csv>] [--seed <int>]."""

from __future__ import annotations

import argparse
import sys

from .models import SpecError, build_model
from .server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fairprobe-adapter",
        description=(
            "Host a classifier behind the fairprobe line-delimited JSON "
            "protocol on stdin/stdout."
        ),
    )
    parser.add_argument(
        "--model", required=True,
        help="model spec: const:<label>:<params>, linear:<model-file>, "
             "or sklearn:<kind>[:k=v,...]",
    )
    parser.add_argument("--train", default=None, help="training CSV (last column is the label)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        model = build_model(args.model, args.train, args.seed)
    except (SpecError, OSError) as exc:
        print(f"fairprobe-adapter: {exc}", file=sys.stderr)
        return 1
    print(
        f"fairprobe-adapter: serving {model.description} "
        f"({model.params} parameters, alphabet {model.alphabet})",
        file=sys.stderr,
    )
    serve(model)
    return 0


if __name__ == "__main__":
    sys.exit(main())
