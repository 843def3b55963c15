"""Command-line surface: order-bench-adapter <subcommand>.

Exit codes match the benchmark CLI: 0 success, 1 usage error, 2 data
error, 3 endpoint/protocol error.
"""

import argparse
import json
import sys
from pathlib import Path

from order_bench_adapter import model as model_mod
from order_bench_adapter.encoding import EncodingError, build_training_pairs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_ENDPOINT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="order-bench-adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-pairs",
                       help="print training pairs as JSON lines (the encode contract)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=["seq", "random", "none"], default="seq")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sentences", type=int)
    p.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("finetune", help="train a model on a corpus's pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=["seq", "random", "none"], default="seq")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sentences", type=int)
    p.add_argument("--base-model", help="pretrained checkpoint; default is a tiny random init")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--out", required=True, help="model artifact directory")

    p = sub.add_parser("serve", help="serve a model artifact over stdio")
    p.add_argument("--model", required=True, help="model artifact directory")

    return parser


def _cmd_build_pairs(args) -> int:
    pairs = build_training_pairs(args.corpus, args.mode, args.seed, args.max_sentences)
    lines = [json.dumps(p.to_json(), ensure_ascii=False) for p in pairs]
    if args.out:
        Path(args.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def _cmd_finetune(args) -> int:
    pairs = build_training_pairs(args.corpus, args.mode, args.seed, args.max_sentences)
    config = model_mod.FineTuneConfig(
        base_model=args.base_model, epochs=args.epochs, learning_rate=args.lr,
        batch_size=args.batch_size, seed=args.seed,
    )
    losses = model_mod.fine_tune(pairs, config, args.out)
    print(f"trained on {len(pairs)} pairs for {len(losses)} epochs; "
          f"loss {losses[0]:.4f} -> {losses[-1]:.4f}; artifact in {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from order_bench_adapter.serve import Endpoint  # defer the torch import

    return Endpoint(args.model).serve_stdio()


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "build-pairs":
            return _cmd_build_pairs(args)
        if args.command == "finetune":
            return _cmd_finetune(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except (EncodingError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ENDPOINT
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
