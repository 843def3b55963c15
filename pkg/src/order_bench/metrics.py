"""Evaluation metrics over predicted vs gold marker sequences.

Everything is computed in exact rational arithmetic (fractions.Fraction);
floats appear only when a report is rendered.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from order_bench.permutation import (
    Permutation,
    ShuffledInstance,
    count_inversions,
    min_swaps,
    relative_displacement,
)


@dataclass(frozen=True)
class InstanceResult:
    instance_id: str
    y_pred: Permutation
    y_gold: Permutation
    n: int
    shuffle_degree: Fraction

    def __post_init__(self):
        if not (len(self.y_pred) == len(self.y_gold) == self.n):
            raise ValueError(
                f"instance {self.instance_id!r}: prediction/gold sizes must equal n={self.n}"
            )


@dataclass(frozen=True)
class MetricSummary:
    accuracy: Fraction
    pmr: Fraction
    tau: Fraction
    head_acc: Fraction
    tail_acc: Fraction
    n_instances: int

    def to_json(self) -> dict:
        return {
            "accuracy": float(self.accuracy),
            "pmr": float(self.pmr),
            "tau": float(self.tau),
            "head_acc": float(self.head_acc),
            "tail_acc": float(self.tail_acc),
            "n_instances": self.n_instances,
        }


def accuracy(r: InstanceResult) -> Fraction:
    """Fraction of positions predicted correctly."""
    hits = sum(1 for a, b in zip(r.y_pred, r.y_gold) if a == b)
    return Fraction(hits, r.n)


def exact_match(r: InstanceResult) -> bool:
    return r.y_pred == r.y_gold


def pmr(results: Sequence[InstanceResult]) -> Fraction:
    """Fraction of instances matching gold exactly."""
    if not results:
        raise ValueError("pmr of an empty result list is undefined")
    return Fraction(sum(exact_match(r) for r in results), len(results))


def kendall_tau(r: InstanceResult) -> Fraction:
    """1 - 2 * inversions / C(n, 2); defined as 1 for n = 1."""
    if r.n == 1:
        return Fraction(1)
    inv = count_inversions(r.y_pred, r.y_gold)
    return 1 - Fraction(2 * inv, comb(r.n, 2))


def head_tail_accuracy(results: Sequence[InstanceResult]) -> tuple[Fraction, Fraction]:
    """Fractions of instances with correct first and correct last position."""
    if not results:
        raise ValueError("head/tail accuracy of an empty result list is undefined")
    head = sum(r.y_pred[0] == r.y_gold[0] for r in results)
    tail = sum(r.y_pred[-1] == r.y_gold[-1] for r in results)
    return Fraction(head, len(results)), Fraction(tail, len(results))


def summarize(results: Sequence[InstanceResult]) -> MetricSummary:
    """Unweighted means of Acc and tau over instances; PMR as a count ratio."""
    if not results:
        raise ValueError("cannot summarize an empty result list")
    n = len(results)
    head, tail = head_tail_accuracy(results)
    return MetricSummary(
        accuracy=sum(accuracy(r) for r in results) / n,
        pmr=pmr(results),
        tau=sum(kendall_tau(r) for r in results) / n,
        head_acc=head,
        tail_acc=tail,
        n_instances=n,
    )


def round_one_decimal(x: Fraction) -> Fraction:
    """Round half away from zero at 1 decimal, exactly."""
    scaled = x * 10
    if scaled >= 0:
        k = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    else:
        k = -((-2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator))
    return Fraction(k, 10)


def bucket_label(key: Fraction) -> str:
    return f"{float(key):.1f}"


@dataclass(frozen=True)
class BucketTable:
    """Per-bucket correctness counts keyed by exact rationals."""

    correct: Mapping[Fraction, int]
    total: Mapping[Fraction, int]

    def accuracy_by_bucket(self) -> dict[Fraction, Fraction]:
        return {k: Fraction(self.correct.get(k, 0), self.total[k]) for k in sorted(self.total)}

    def to_json(self) -> dict:
        return {
            bucket_label(k): {
                "count": self.total[k],
                "accuracy": float(Fraction(self.correct.get(k, 0), self.total[k])),
            }
            for k in sorted(self.total)
        }


def positionwise_accuracy(results: Sequence[InstanceResult]) -> BucketTable:
    """Per-position correctness bucketed by relative output position i/n."""
    if not results:
        raise ValueError("positionwise accuracy of an empty result list is undefined")
    correct: dict = defaultdict(int)
    total: dict = defaultdict(int)
    for r in results:
        for i in range(1, r.n + 1):
            key = round_one_decimal(Fraction(i, r.n))
            total[key] += 1
            if r.y_pred[i - 1] == r.y_gold[i - 1]:
                correct[key] += 1
    return BucketTable(correct=dict(correct), total=dict(total))


def displacement_accuracy(
    results: Sequence[InstanceResult],
    instances: Sequence[ShuffledInstance],
) -> BucketTable:
    """Per-position correctness bucketed by the sentence's relative displacement."""
    if len(results) != len(instances):
        raise ValueError("results and instances must pair up one-to-one")
    correct: dict = defaultdict(int)
    total: dict = defaultdict(int)
    for r, inst in zip(results, instances):
        if r.instance_id != inst.id or r.n != inst.n:
            raise ValueError(f"result/instance mismatch at {r.instance_id!r}")
        for i in range(1, r.n + 1):
            key = round_one_decimal(relative_displacement(i, inst))
            total[key] += 1
            if r.y_pred[i - 1] == r.y_gold[i - 1]:
                correct[key] += 1
    return BucketTable(correct=dict(correct), total=dict(total))


def prediction_displacement(r: InstanceResult) -> int:
    """Minimum swaps turning the prediction into gold."""
    pos_in_gold = {v: i + 1 for i, v in enumerate(r.y_gold)}
    rel = tuple(pos_in_gold[v] for v in r.y_pred)
    return min_swaps(rel)


def prediction_displacement_histogram(results: Sequence[InstanceResult]) -> dict[int, int]:
    """Histogram of swap distance to gold over incorrect predictions only."""
    hist: Counter = Counter()
    for r in results:
        if not exact_match(r):
            hist[prediction_displacement(r)] += 1
    return dict(sorted(hist.items()))


def cluster_purity(assignments: Sequence, labels: Sequence) -> Fraction:
    """Mean over clusters of the modal label's relative proportion."""
    if len(assignments) != len(labels):
        raise ValueError("assignments and labels must have equal length")
    if not assignments:
        raise ValueError("cluster purity of empty input is undefined")
    members: dict = defaultdict(list)
    for cluster, label in zip(assignments, labels):
        members[cluster].append(label)
    purities = [
        Fraction(Counter(group).most_common(1)[0][1], len(group))
        for group in members.values()
    ]
    return sum(purities, Fraction(0)) / len(purities)
