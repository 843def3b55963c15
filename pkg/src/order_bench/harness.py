"""Evaluation harness: shuffle, order, aggregate, bucket, report.

Shuffles are generated here (not stored in corpora), keyed by the global
seed and the instance id, so different orderers see identical shuffles.
Reports are a pure function of the run configuration: aggregation happens
in ascending instance-id order regardless of worker parallelism.
"""

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from order_bench import metrics
from order_bench.codec import MarkerMode
from order_bench.corpus import Corpus, Document, truncate
from order_bench.metrics import BucketTable, InstanceResult, MetricSummary
from order_bench.orderers import Orderer, OrdererError, BTSortOrderer, TrainConfig, train_pairwise
from order_bench.permutation import ShuffledInstance, sample_shuffle
from order_bench.seeding import derive_seed

REPORT_SCHEMA = "order-bench-report/1"


@dataclass(frozen=True)
class RunConfig:
    corpus_name: str
    orderer_spec: str
    mode: str = "seq"
    seed: int = 0
    max_sentences: Optional[int] = None
    repeats: int = 1
    jobs: int = 1  # execution detail; never echoed into reports

    def echo(self) -> dict:
        return {
            "corpus": self.corpus_name,
            "orderer": self.orderer_spec,
            "mode": self.mode,
            "seed": self.seed,
            "max_sentences": self.max_sentences,
            "repeats": self.repeats,
        }


@dataclass
class EvaluationReport:
    config: dict
    summary: MetricSummary
    results: list[InstanceResult]
    instances: list[ShuffledInstance]
    buckets_length: dict[int, MetricSummary]
    buckets_shuffle: dict[Fraction, MetricSummary]
    buckets_position: BucketTable
    buckets_displacement: BucketTable
    displacement_histogram: dict[int, int]
    error_details: list[tuple[str, str]] = field(default_factory=list)
    repairs: int = 0

    @property
    def errors(self) -> int:
        return len(self.error_details)

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "config": self.config,
            "summary": self.summary.to_json(),
            "buckets_length": {
                str(k): v.to_json() for k, v in sorted(self.buckets_length.items())
            },
            "buckets_shuffle": {
                metrics.bucket_label(k): v.to_json()
                for k, v in sorted(self.buckets_shuffle.items())
            },
            "buckets_position": self.buckets_position.to_json(),
            "buckets_displacement": self.buckets_displacement.to_json(),
            "displacement_histogram": {
                str(k): v for k, v in sorted(self.displacement_histogram.items())
            },
            "errors": self.errors,
            "repairs": self.repairs,
        }


def make_instance(doc: Document, global_seed: int,
                  max_sentences: Optional[int] = None,
                  repeat: int = 0) -> ShuffledInstance:
    """Build the deterministic shuffled instance for one document."""
    if max_sentences is not None:
        doc = truncate(doc, max_sentences)
    if repeat > 0:
        doc = Document(id=f"{doc.id}@{repeat}", sentences=doc.sentences)
    shuffle_seed = derive_seed("instance", global_seed, doc.id)
    return ShuffledInstance(doc=doc, gold_markers=sample_shuffle(doc.n_sentences, shuffle_seed))


def _group_summaries(pairs) -> dict:
    groups: dict = {}
    for key, result in pairs:
        groups.setdefault(key, []).append(result)
    return {key: metrics.summarize(rs) for key, rs in groups.items()}


def evaluate(corpus: Corpus, orderer: Orderer, config: RunConfig) -> EvaluationReport:
    """Run an orderer over every (document, repeat) and aggregate.

    Per-instance orderer failures are recorded and excluded from metric
    denominators; the run always completes.
    """
    tasks = [
        make_instance(doc, config.seed, config.max_sentences, repeat)
        for doc in corpus
        for repeat in range(config.repeats)
    ]

    def run_one(instance: ShuffledInstance):
        try:
            y_pred, repaired = orderer.order_detailed(instance)
        except OrdererError as e:
            return instance, None, str(e), False
        result = InstanceResult(
            instance_id=instance.id,
            y_pred=tuple(y_pred),
            y_gold=instance.gold_markers,
            n=instance.n,
            shuffle_degree=instance.shuffle_degree,
        )
        return instance, result, None, repaired

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(run_one, tasks))
    else:
        outcomes = [run_one(t) for t in tasks]
    outcomes.sort(key=lambda o: o[0].id)

    instances = []
    results = []
    errors = []
    repairs = 0
    for instance, result, error, repaired in outcomes:
        if error is not None:
            errors.append((instance.id, error))
            continue
        instances.append(instance)
        results.append(result)
        repairs += repaired

    if not results:
        # Every instance failed (e.g. unreachable endpoint): the run still
        # completes, with an all-zero summary and a full error ledger.
        zero = Fraction(0)
        return EvaluationReport(
            config=config.echo(),
            summary=MetricSummary(zero, zero, zero, zero, zero, 0),
            results=[],
            instances=[],
            buckets_length={},
            buckets_shuffle={},
            buckets_position=BucketTable(correct={}, total={}),
            buckets_displacement=BucketTable(correct={}, total={}),
            displacement_histogram={},
            error_details=errors,
            repairs=0,
        )

    return EvaluationReport(
        config=config.echo(),
        summary=metrics.summarize(results),
        results=results,
        instances=instances,
        buckets_length=_group_summaries((r.n, r) for r in results),
        buckets_shuffle=_group_summaries(
            (metrics.round_one_decimal(r.shuffle_degree), r) for r in results
        ),
        buckets_position=metrics.positionwise_accuracy(results),
        buckets_displacement=metrics.displacement_accuracy(results, instances),
        displacement_histogram=metrics.prediction_displacement_histogram(results),
        error_details=errors,
        repairs=repairs,
    )


def bucket_report(report: EvaluationReport, axis: str) -> list[dict]:
    """Ordered per-bucket Acc/PMR/tau table for the length or d-hat axis."""
    if axis == "length":
        buckets = sorted(report.buckets_length.items())
        render = str
    elif axis == "shuffle_degree":
        buckets = sorted(report.buckets_shuffle.items())
        render = metrics.bucket_label
    else:
        raise ValueError(f"unknown bucket axis {axis!r}")
    return [
        {
            "bucket": render(key),
            "count": s.n_instances,
            "accuracy": float(s.accuracy),
            "pmr": float(s.pmr),
            "tau": float(s.tau),
        }
        for key, s in buckets
    ]


@dataclass
class ZeroShotMatrix:
    """Train-corpus x eval-corpus grid of metric summaries."""

    train_names: list[str]
    eval_names: list[str]
    cells: dict  # (train_name, eval_name) -> MetricSummary
    row_errors: dict = field(default_factory=dict)  # train_name -> message

    def to_json(self) -> dict:
        matrix = {}
        for t in self.train_names:
            if t in self.row_errors:
                matrix[t] = {"error": self.row_errors[t]}
                continue
            matrix[t] = {e: self.cells[(t, e)].to_json() for e in self.eval_names}
        return {
            "schema": "order-bench-zeroshot/1",
            "train_corpora": self.train_names,
            "eval_corpora": self.eval_names,
            "matrix": matrix,
        }


def zero_shot(
    train_corpora: list[Corpus],
    eval_corpora: list[Corpus],
    train_config: TrainConfig,
    seed: int = 0,
    max_sentences: Optional[int] = None,
    jobs: int = 1,
) -> ZeroShotMatrix:
    """Train one pairwise model per training corpus; evaluate on all others.

    A training failure aborts only that row.
    """
    matrix = ZeroShotMatrix(
        train_names=[c.name for c in train_corpora],
        eval_names=[c.name for c in eval_corpora],
        cells={},
    )
    for train in train_corpora:
        try:
            model = train_pairwise(train, train_config)
        except Exception as e:  # noqa: BLE001 - row isolation is the contract
            matrix.row_errors[train.name] = str(e)
            continue
        orderer = BTSortOrderer(model)
        for eval_corpus in eval_corpora:
            config = RunConfig(
                corpus_name=eval_corpus.name,
                orderer_spec=f"btsort[{train.name}]",
                seed=seed,
                max_sentences=max_sentences,
                jobs=jobs,
            )
            report = evaluate(eval_corpus, orderer, config)
            matrix.cells[(train.name, eval_corpus.name)] = report.summary
    return matrix


def _report_csv(report: EvaluationReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["axis", "bucket", "count", "accuracy", "pmr", "tau"])
    s = report.summary
    writer.writerow(["summary", "", s.n_instances, float(s.accuracy), float(s.pmr), float(s.tau)])
    for axis in ("length", "shuffle_degree"):
        for row in bucket_report(report, axis):
            writer.writerow([axis, row["bucket"], row["count"], row["accuracy"],
                             row["pmr"], row["tau"]])
    for name, table in (("position", report.buckets_position),
                        ("displacement", report.buckets_displacement)):
        for key, entry in table.to_json().items():
            writer.writerow([name, key, entry["count"], entry["accuracy"], "", ""])
    for d, count in sorted(report.displacement_histogram.items()):
        writer.writerow(["displacement_histogram", d, count, "", "", ""])
    return out.getvalue()


def _md_table(headers: list[str], rows: list[list]) -> str:
    lines = ["| " + " | ".join(headers) + " |",
             "|" + "|".join("---" for _ in headers) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(lines)


def _fmt(x: Fraction) -> str:
    return f"{float(x):.4f}"


def _report_markdown(report: EvaluationReport) -> str:
    s = report.summary
    parts = [
        f"# Evaluation report: {report.config['orderer']} on {report.config['corpus']}",
        "",
        _md_table(
            ["Instances", "Acc", "PMR", "tau", "Head", "Tail", "Errors", "Repairs"],
            [[s.n_instances, _fmt(s.accuracy), _fmt(s.pmr), _fmt(s.tau),
              _fmt(s.head_acc), _fmt(s.tail_acc), report.errors, report.repairs]],
        ),
    ]
    for axis, title in (("length", "By sentence count"),
                        ("shuffle_degree", "By normalized shuffle degree")):
        rows = [[r["bucket"], r["count"], f"{r['accuracy']:.4f}",
                 f"{r['pmr']:.4f}", f"{r['tau']:.4f}"] for r in bucket_report(report, axis)]
        parts += ["", f"## {title}", "",
                  _md_table(["Bucket", "Count", "Acc", "PMR", "tau"], rows)]
    for table, title in ((report.buckets_position, "By relative output position"),
                         (report.buckets_displacement, "By relative displacement")):
        rows = [[k, v["count"], f"{v['accuracy']:.4f}"] for k, v in table.to_json().items()]
        parts += ["", f"## {title}", "", _md_table(["Bucket", "Count", "Acc"], rows)]
    if report.displacement_histogram:
        rows = [[d, c] for d, c in sorted(report.displacement_histogram.items())]
        parts += ["", "## Prediction displacement histogram", "",
                  _md_table(["d(Y, Y*)", "Count"], rows)]
    return "\n".join(parts) + "\n"


def _matrix_csv(matrix: ZeroShotMatrix) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["train", "eval", "n_instances", "accuracy", "pmr", "tau"])
    for t in matrix.train_names:
        for e in matrix.eval_names:
            if t in matrix.row_errors:
                writer.writerow([t, e, "", "", "", ""])
                continue
            s = matrix.cells[(t, e)]
            writer.writerow([t, e, s.n_instances, float(s.accuracy), float(s.pmr), float(s.tau)])
    return out.getvalue()


def _matrix_markdown(matrix: ZeroShotMatrix) -> str:
    headers = ["Train \\ Eval"] + matrix.eval_names
    rows = []
    for t in matrix.train_names:
        row = [t]
        for e in matrix.eval_names:
            if t in matrix.row_errors:
                row.append("error")
            else:
                s = matrix.cells[(t, e)]
                row.append(f"tau={_fmt(s.tau)} / PMR={_fmt(s.pmr)}")
        rows.append(row)
    return "# Zero-shot matrix\n\n" + _md_table(headers, rows) + "\n"


def render_report(obj: Union[EvaluationReport, ZeroShotMatrix], format: str) -> str:
    if format == "json":
        return json.dumps(obj.to_json(), indent=2) + "\n"
    if isinstance(obj, EvaluationReport):
        if format == "csv":
            return _report_csv(obj)
        if format == "markdown":
            return _report_markdown(obj)
    else:
        if format == "csv":
            return _matrix_csv(obj)
        if format == "markdown":
            return _matrix_markdown(obj)
    raise ValueError(f"unknown report format {format!r}")


def write_report(obj: Union[EvaluationReport, ZeroShotMatrix],
                 path: Union[str, Path], format: str = "json") -> None:
    path = Path(path)
    try:
        path.write_text(render_report(obj, format), encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e}") from e
