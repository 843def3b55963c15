"""Command-line surface: order-bench <subcommand>.

Exit codes: 0 success, 1 usage error, 2 data error, 3 endpoint/protocol
error. Machine-readable output goes to files; stdout carries a short human
summary.
"""

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from order_bench import codec, harness, mock, wire
from order_bench.codec import MarkerMode
from order_bench.corpus import (
    CorpusError,
    SplitSpec,
    generate_synthetic,
    load_corpus,
    save_corpus,
    split,
)
from order_bench.orderers import (
    BTSortOrderer,
    ExternalOrderer,
    GoldOrderer,
    IdentityOrderer,
    OrdererError,
    RandomOrderer,
    TrainConfig,
    train_pairwise,
)

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
    parser = _Parser(prog="order-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic corpus")
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--sentences", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cue-scheme", type=int, default=0)
    p.add_argument("--name")
    p.add_argument("--out", required=True)

    p = sub.add_parser("split", help="split a corpus into train/dev/test")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("encode", help="print marker encodings as JSON lines")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=["seq", "random", "none"], default="seq")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sentences", type=int)

    p = sub.add_parser("evaluate", help="evaluate an orderer on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--orderer", required=True,
                   help="identity|random|gold|btsort|external:<uri>")
    p.add_argument("--mode", choices=["seq", "random", "none"], default="seq")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sentences", type=int)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    p.add_argument("--train-corpus", help="training corpus for the btsort orderer")
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--hash-dim", type=int, default=1 << 18)
    p.add_argument("--corrupt-targets", action="store_true",
                   help="train against random targets (shuffled-output ablation)")

    p = sub.add_parser("zero-shot", help="train-on-one / evaluate-on-all matrix")
    p.add_argument("--train", required=True, help="comma-separated corpus files")
    p.add_argument("--eval", required=True, help="comma-separated corpus files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sentences", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--hash-dim", type=int, default=1 << 18)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="json")

    p = sub.add_parser("serve-mock", help="run a mock wire-protocol endpoint")
    p.add_argument("--mock", default="gold", help="gold|noisy:<p>|invalid")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sentences", type=int)
    p.add_argument("--tcp", type=int, help="serve on this TCP port instead of stdio")
    p.add_argument("--max-connections", type=int)

    p = sub.add_parser("report", help="re-render a JSON report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="markdown")
    p.add_argument("--out", required=True)

    return parser


def _make_orderer(args, mode: MarkerMode):
    spec = args.orderer
    if spec == "identity":
        return IdentityOrderer()
    if spec == "random":
        return RandomOrderer(seed=args.seed)
    if spec == "gold":
        return GoldOrderer()
    if spec == "btsort":
        if not args.train_corpus:
            raise UsageError("--orderer btsort requires --train-corpus")
        train = load_corpus(args.train_corpus)
        model = train_pairwise(train, TrainConfig(
            epochs=args.epochs, learning_rate=args.lr, seed=args.seed,
            hash_dim=args.hash_dim, corrupt_targets=args.corrupt_targets,
        ))
        return BTSortOrderer(model)
    if spec.startswith("external:"):
        return ExternalOrderer(spec[len("external:"):], mode=mode)
    raise UsageError(f"unknown orderer {spec!r}")


def _cmd_gen_synthetic(args) -> int:
    corpus = generate_synthetic(args.docs, args.sentences, args.seed,
                                cue_scheme=args.cue_scheme, name=args.name)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} documents to {args.out}")
    return EXIT_OK


def _cmd_split(args) -> int:
    ratios = args.ratios.split(",")
    if len(ratios) != 3:
        raise UsageError("--ratios must be three comma-separated numbers")
    spec = SplitSpec(*(Fraction(r) for r in ratios), seed=args.seed)
    corpus = load_corpus(args.corpus)
    parts = split(corpus, spec)
    for part, suffix in zip(parts, ("train", "dev", "test")):
        path = f"{args.out_prefix}.{suffix}.jsonl"
        save_corpus(part, path)
        print(f"wrote {len(part)} documents to {path}")
    return EXIT_OK


def _cmd_encode(args) -> int:
    corpus = load_corpus(args.corpus)
    mode = MarkerMode.parse(args.mode, seed=args.seed)
    for doc in corpus:
        instance = harness.make_instance(doc, args.seed, args.max_sentences)
        marked = codec.encode_input(instance, mode)
        print(json.dumps({
            "id": instance.id,
            "n": instance.n,
            "text": marked.text,
            "markers": list(marked.marker_of_slot),
            "gold_output": codec.gold_output_text(instance, marked.marker_of_slot),
        }, ensure_ascii=False))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    corpus = load_corpus(args.corpus)
    mode = MarkerMode.parse(args.mode, seed=args.seed)
    orderer = _make_orderer(args, mode)
    if isinstance(orderer, ExternalOrderer):
        orderer.handshake()  # unreachable endpoint is an endpoint error, not data
    config = harness.RunConfig(
        corpus_name=corpus.name,
        orderer_spec=args.orderer,
        mode=args.mode,
        seed=args.seed,
        max_sentences=args.max_sentences,
        repeats=args.repeats,
        jobs=args.jobs,
    )
    report = harness.evaluate(corpus, orderer, config)
    harness.write_report(report, args.out, args.format)
    s = report.summary
    print(f"{args.orderer} on {corpus.name}: "
          f"Acc={float(s.accuracy):.4f} PMR={float(s.pmr):.4f} tau={float(s.tau):.4f} "
          f"({s.n_instances} instances, {report.errors} errors, {report.repairs} repairs)")
    print(f"report written to {args.out}")
    if report.errors and s.n_instances == 0:
        return EXIT_ENDPOINT
    return EXIT_OK


def _cmd_zero_shot(args) -> int:
    train_corpora = [load_corpus(p) for p in args.train.split(",")]
    eval_corpora = [load_corpus(p) for p in args.eval.split(",")]
    matrix = harness.zero_shot(
        train_corpora, eval_corpora,
        TrainConfig(epochs=args.epochs, learning_rate=args.lr,
                    seed=args.seed, hash_dim=args.hash_dim),
        seed=args.seed, max_sentences=args.max_sentences, jobs=args.jobs,
    )
    harness.write_report(matrix, args.out, args.format)
    print(f"{len(train_corpora)}x{len(eval_corpora)} zero-shot matrix written to {args.out}")
    return EXIT_OK


def _cmd_serve_mock(args) -> int:
    spec = mock.MockSpec.parse(args.mock)
    corpus = load_corpus(args.corpus)
    endpoint = mock.MockEndpoint(spec, corpus, args.seed, args.max_sentences)
    if args.tcp is not None:
        return endpoint.serve_tcp(args.tcp, args.max_connections)
    return endpoint.serve_stdio()


def _cmd_report(args) -> int:
    try:
        payload = json.loads(Path(args.input).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise CorpusError(f"cannot read report {args.input}: {e}") from e
    # Re-render from the canonical JSON without recomputing anything.
    if args.format == "json":
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    elif payload.get("schema") == harness.REPORT_SCHEMA:
        Path(args.out).write_text(_render_loaded_report(payload, args.format),
                                  encoding="utf-8")
    else:
        raise CorpusError(f"{args.input} is not an {harness.REPORT_SCHEMA} report")
    print(f"rendered {args.input} to {args.out}")
    return EXIT_OK


def _render_loaded_report(payload: dict, format: str) -> str:
    import csv as _csv
    import io

    if format == "csv":
        out = io.StringIO()
        writer = _csv.writer(out)
        writer.writerow(["axis", "bucket", "count", "accuracy", "pmr", "tau"])
        s = payload["summary"]
        writer.writerow(["summary", "", s["n_instances"], s["accuracy"], s["pmr"], s["tau"]])
        for axis, key in (("length", "buckets_length"), ("shuffle_degree", "buckets_shuffle")):
            for bucket, entry in payload[key].items():
                writer.writerow([axis, bucket, entry["n_instances"], entry["accuracy"],
                                 entry["pmr"], entry["tau"]])
        for axis, key in (("position", "buckets_position"),
                          ("displacement", "buckets_displacement")):
            for bucket, entry in payload[key].items():
                writer.writerow([axis, bucket, entry["count"], entry["accuracy"], "", ""])
        for d, count in payload["displacement_histogram"].items():
            writer.writerow(["displacement_histogram", d, count, "", "", ""])
        return out.getvalue()
    # markdown
    s = payload["summary"]
    lines = [
        f"# Evaluation report: {payload['config']['orderer']} on {payload['config']['corpus']}",
        "",
        "| Instances | Acc | PMR | tau | Errors | Repairs |",
        "|---|---|---|---|---|---|",
        f"| {s['n_instances']} | {s['accuracy']:.4f} | {s['pmr']:.4f} | {s['tau']:.4f} "
        f"| {payload['errors']} | {payload['repairs']} |",
    ]
    for key, title in (("buckets_length", "By sentence count"),
                       ("buckets_shuffle", "By normalized shuffle degree")):
        lines += ["", f"## {title}", "", "| Bucket | Count | Acc | PMR | tau |",
                  "|---|---|---|---|---|"]
        for bucket, entry in payload[key].items():
            lines.append(f"| {bucket} | {entry['n_instances']} | {entry['accuracy']:.4f} "
                         f"| {entry['pmr']:.4f} | {entry['tau']:.4f} |")
    return "\n".join(lines) + "\n"


_COMMANDS = {
    "gen-synthetic": _cmd_gen_synthetic,
    "split": _cmd_split,
    "encode": _cmd_encode,
    "evaluate": _cmd_evaluate,
    "zero-shot": _cmd_zero_shot,
    "serve-mock": _cmd_serve_mock,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, FileNotFoundError, ValueError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (OrdererError, wire.TransportError, wire.ProtocolError) as e:
        print(f"endpoint error: {e}", file=sys.stderr)
        return EXIT_ENDPOINT


if __name__ == "__main__":
    sys.exit(main())
