"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured value. Run with `pytest -s` to see them.
"""

import json
import math
import sys
import time
from fractions import Fraction
from itertools import permutations
from math import comb

import pytest

from oracles import bfs_swap_distances, brute_force_inversions
from order_bench import codec, metrics
from order_bench.cli import main as cli_main
from order_bench.codec import MarkerMode, RawPrediction
from order_bench.corpus import Document, generate_synthetic, save_corpus
from order_bench.harness import RunConfig, evaluate, zero_shot
from order_bench.metrics import InstanceResult
from order_bench.orderers import (
    BTSortOrderer,
    ExternalOrderer,
    RandomOrderer,
    TrainConfig,
    btsort_decode,
    train_pairwise,
)
from order_bench.permutation import min_swaps, sample_shuffle, shuffle_document
from order_bench.seeding import derive_rng


def _report(name, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_metric_oracles_exhaustive():
    start = time.monotonic()
    checked_tau = 0
    for n in range(2, 7):
        for gold in permutations(range(1, n + 1)):
            for pred in permutations(range(1, n + 1)):
                expected = 1 - Fraction(
                    2 * brute_force_inversions(pred, gold), comb(n, 2)
                )
                r = InstanceResult(instance_id="o", y_pred=pred, y_gold=gold,
                                   n=n, shuffle_degree=Fraction(0))
                assert metrics.kendall_tau(r) == expected
                checked_tau += 1
    checked_swaps = 0
    for n in range(1, 6):
        for p, d in bfs_swap_distances(n).items():
            assert min_swaps(p) == d
            checked_swaps += 1
    elapsed = time.monotonic() - start
    _report(
        "metric oracles (exhaustive)",
        elapsed < 10,
        f"{checked_tau} tau pairs (n<=6) and {checked_swaps} swap distances (n<=5) "
        f"exact in {elapsed:.1f}s",
    )


def test_codec_round_trip_and_repair():
    start = time.monotonic()
    rng = derive_rng("acceptance-codec", 0)
    modes = [MarkerMode.sequential(), MarkerMode.random_labels(99), MarkerMode.none()]
    rounds = 0
    for k in range(1_002):
        n = rng.randint(1, 20)
        doc = Document(id=f"acc-{k}", sentences=tuple(f"sentence {i} of {k}." for i in range(n)))
        inst = shuffle_document(doc, seed=rng.getrandbits(63))
        mode = modes[k % 3]
        marked = codec.encode_input(inst, mode)
        raw = codec.parse_output(codec.gold_output_text(inst, marked.marker_of_slot))
        slots = RawPrediction(
            tokens=tuple(codec.labels_to_slots(raw.tokens, marked.marker_of_slot))
        )
        assert codec.reconstruct(inst, codec.repair(slots, n)) == list(doc.sentences)
        rounds += 1
    adversarial = 0
    for k in range(10_000):
        n = rng.randint(1, 15)
        tokens = tuple(rng.randint(-3, 25) for _ in range(rng.randint(0, 30)))
        first = codec.repair(RawPrediction(tokens=tokens), n)
        assert sorted(first) == list(range(1, n + 1))
        assert codec.repair(RawPrediction(tokens=first), n) == first
        adversarial += 1
    elapsed = time.monotonic() - start
    _report(
        "codec round trip + repair totality/idempotence",
        True,
        f"{rounds} round trips (all modes, n in 1..20), "
        f"{adversarial} adversarial repairs in {elapsed:.1f}s",
    )


def test_random_baseline_statistics():
    start = time.monotonic()
    corpus = generate_synthetic(10_000, 5, seed=1, name="acc-random")
    report = evaluate(corpus, RandomOrderer(seed=2),
                      RunConfig("acc-random", "random", seed=3))
    tau = float(report.summary.tau)
    acc = float(report.summary.accuracy)
    matches = int(report.summary.pmr * report.summary.n_instances)
    p = 1 / math.factorial(5)
    margin = 2.576 * math.sqrt(10_000 * p * (1 - p))
    elapsed = time.monotonic() - start
    ok = (abs(tau) <= 0.05 and abs(acc - 0.2) <= 0.02
          and abs(matches - 10_000 * p) <= margin and elapsed < 30)
    _report(
        "random baseline statistics (10k instances, n=5)",
        ok,
        f"tau={tau:+.4f} (|.|<=0.05), acc={acc:.4f} (0.2 +/- 0.02), "
        f"exact={matches} (expected {10_000 * p:.1f} +/- {margin:.1f}), {elapsed:.1f}s",
    )


def test_trainable_baseline_learnability():
    start = time.monotonic()
    train = generate_synthetic(500, 5, seed=3, name="acc-train")
    held = generate_synthetic(100, 5, seed=4, name="acc-held")
    model = train_pairwise(train, TrainConfig(seed=5))
    bt = evaluate(held, BTSortOrderer(model), RunConfig("acc-held", "btsort", seed=6))
    rnd = evaluate(held, RandomOrderer(seed=7), RunConfig("acc-held", "random", seed=6))
    pmr = float(bt.summary.pmr)
    tau = float(bt.summary.tau)
    rand_tau = float(rnd.summary.tau)
    elapsed = time.monotonic() - start
    ok = pmr >= 0.90 and tau >= 0.95 and -0.05 <= rand_tau <= 0.05 and elapsed < 60
    _report(
        "trainable baseline learnability (500 train / 100 held-out)",
        ok,
        f"btsort PMR={pmr:.3f} (>=0.90), tau={tau:.3f} (>=0.95), "
        f"random tau={rand_tau:+.3f} (within +/-0.05), {elapsed:.1f}s",
    )


def test_consistent_comparator_recovery():
    checked = 0
    for n in range(1, 8):
        rng = derive_rng("acceptance-comparator", n)
        for _ in range(100):
            order = list(sample_shuffle(n, seed=rng.getrandbits(63)))
            rank = {slot: r for r, slot in enumerate(order)}
            decoded = btsort_decode(n, lambda i, j: 0.8 if rank[i] < rank[j] else 0.2)
            assert decoded == tuple(order)
            checked += 1
    _report("consistent-comparator recovery", True,
            f"{checked} random total orders recovered exactly for n<=7")


def test_zero_shot_matrix_contrast():
    train_config = TrainConfig(seed=3)
    a = generate_synthetic(500, 5, seed=1, cue_scheme=0, name="same-a")
    b = generate_synthetic(500, 5, seed=2, cue_scheme=0, name="same-b")
    same = zero_shot([a, b], [a, b], train_config, seed=11)
    same_gap = max(
        abs(float(same.cells[(t.name, e.name)].tau - same.cells[(e.name, e.name)].tau))
        for t in (a, b) for e in (a, b) if t.name != e.name
    )
    x = generate_synthetic(500, 5, seed=1, cue_scheme=0, name="cue-x")
    y = generate_synthetic(500, 5, seed=2, cue_scheme=1, name="cue-y")
    disjoint = zero_shot([x, y], [x, y], train_config, seed=11)
    diag_min = min(float(disjoint.cells[(c.name, c.name)].tau) for c in (x, y))
    off = [float(disjoint.cells[(t.name, e.name)].tau)
           for t in (x, y) for e in (x, y) if t.name != e.name]
    ok = (same_gap <= 0.05 and diag_min >= 0.95
          and all(-0.1 <= v <= 0.1 for v in off))
    _report(
        "zero-shot matrix contrast",
        ok,
        f"same-cue |off-diag - diag| = {same_gap:.3f} (<=0.05); disjoint-cue "
        f"diag>={diag_min:.3f} (>=0.95), off-diag taus {['%+.3f' % v for v in off]} "
        f"(within +/-0.1)",
    )


def test_cli_determinism_across_parallelism(tmp_path):
    corpus = generate_synthetic(200, 5, seed=8, name="acc-det")
    corpus_path = tmp_path / "det.jsonl"
    save_corpus(corpus, corpus_path)
    payloads = []
    for jobs in ("1", "8"):
        out = tmp_path / f"det-{jobs}.json"
        code = cli_main(["evaluate", "--corpus", str(corpus_path),
                         "--orderer", "random", "--seed", "13",
                         "--jobs", jobs, "--out", str(out)])
        assert code == 0
        payloads.append(out.read_bytes())
    ok = payloads[0] == payloads[1]
    _report("determinism across parallelism", ok,
            f"--jobs 1 vs --jobs 8 reports byte-identical ({len(payloads[0])} bytes)")


def test_protocol_conformance(tmp_path):
    corpus = generate_synthetic(40, 5, seed=9, name="acc-proto")
    corpus_path = tmp_path / "proto.jsonl"
    save_corpus(corpus, corpus_path)

    def run(mock):
        uri = (f"exec:{sys.executable} -m order_bench serve-mock "
               f"--mock {mock} --corpus {corpus_path} --seed 17")
        orderer = ExternalOrderer(uri)
        report = evaluate(corpus, orderer, RunConfig("acc-proto", "external", seed=17))
        orderer.close()
        return report

    gold = run("gold")
    invalid = run("invalid")
    noisy = run("noisy:1.0")
    ok = (gold.summary.pmr == 1
          and invalid.repairs == invalid.summary.n_instances == len(corpus)
          and invalid.errors == 0
          and noisy.summary.tau == Fraction(4, 5))
    _report(
        "protocol conformance (gold / invalid / noisy mocks)",
        ok,
        f"gold PMR={float(gold.summary.pmr):.2f}; invalid repairs="
        f"{invalid.repairs}/{invalid.summary.n_instances}; "
        f"noisy(p=1) mean tau={float(noisy.summary.tau):.3f} (exactly 0.8)",
    )
