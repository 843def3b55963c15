import json
from fractions import Fraction

import pytest

from order_bench import harness, metrics
from order_bench.corpus import generate_synthetic
from order_bench.harness import RunConfig, ZeroShotMatrix, bucket_report, evaluate, write_report, zero_shot
from order_bench.orderers import GoldOrderer, RandomOrderer, TrainConfig


@pytest.fixture(scope="module")
def mixed_corpus():
    # documents of two lengths so the length axis has two buckets
    short = generate_synthetic(30, 3, seed=61, name="short")
    long = generate_synthetic(30, 5, seed=62, name="long")
    from order_bench.corpus import Corpus

    return Corpus(name="mixed", documents=short.documents + long.documents,
                  provenance="synthetic")


def test_gold_report(mixed_corpus):
    report = evaluate(mixed_corpus, GoldOrderer(), RunConfig("mixed", "gold", seed=1))
    assert report.summary.accuracy == report.summary.pmr == report.summary.tau == 1
    assert report.displacement_histogram == {}
    assert report.errors == 0


def test_report_determinism_across_parallelism(mixed_corpus):
    reports = []
    for jobs in (1, 8):
        config = RunConfig("mixed", "random", seed=7, jobs=jobs)
        report = evaluate(mixed_corpus, RandomOrderer(7), config)
        reports.append(json.dumps(report.to_json(), sort_keys=False))
    assert reports[0] == reports[1]


def test_bucket_counts_partition(mixed_corpus):
    report = evaluate(mixed_corpus, RandomOrderer(3), RunConfig("mixed", "random", seed=2))
    n_success = report.summary.n_instances
    assert sum(s.n_instances for s in report.buckets_length.values()) == n_success
    assert sum(s.n_instances for s in report.buckets_shuffle.values()) == n_success
    total_positions = sum(r.n for r in report.results)
    assert sum(report.buckets_position.total.values()) == total_positions
    assert sum(report.buckets_displacement.total.values()) == total_positions
    assert set(report.buckets_length) == {3, 5}


def test_summary_rederivable_from_instance_records(mixed_corpus):
    report = evaluate(mixed_corpus, RandomOrderer(5), RunConfig("mixed", "random", seed=9))
    assert metrics.summarize(report.results) == report.summary


def test_identity_shuffles_land_in_zero_bucket(mixed_corpus):
    report = evaluate(mixed_corpus, RandomOrderer(1), RunConfig("mixed", "random", seed=4))
    zero_bucket = report.buckets_shuffle.get(Fraction(0))
    degrees = {metrics.round_one_decimal(r.shuffle_degree) for r in report.results}
    assert set(report.buckets_shuffle) == degrees
    if zero_bucket is not None:
        assert zero_bucket.n_instances >= 1


def test_bucket_report_axes(mixed_corpus):
    report = evaluate(mixed_corpus, RandomOrderer(2), RunConfig("mixed", "random", seed=3))
    length_rows = bucket_report(report, "length")
    assert [r["bucket"] for r in length_rows] == ["3", "5"]
    shuffle_rows = bucket_report(report, "shuffle_degree")
    assert sum(r["count"] for r in shuffle_rows) == report.summary.n_instances
    with pytest.raises(ValueError):
        bucket_report(report, "nope")


def test_repeats_produce_distinct_instances(mixed_corpus):
    config = RunConfig("mixed", "random", seed=6, repeats=3)
    report = evaluate(mixed_corpus, RandomOrderer(6), config)
    assert report.summary.n_instances == 3 * len(mixed_corpus)
    ids = [r.instance_id for r in report.results]
    assert len(set(ids)) == len(ids)


def test_max_sentences_truncates_before_shuffling():
    corpus = generate_synthetic(10, 8, seed=71, name="c8")
    config = RunConfig("c8", "gold", seed=1, max_sentences=4)
    report = evaluate(corpus, GoldOrderer(), config)
    assert set(report.buckets_length) == {4}


def test_json_report_round_trip(mixed_corpus, tmp_path):
    report = evaluate(mixed_corpus, RandomOrderer(8), RunConfig("mixed", "random", seed=8))
    path = tmp_path / "r.json"
    write_report(report, path, "json")
    loaded = json.loads(path.read_text(encoding="utf-8"))
    assert loaded == report.to_json()
    assert loaded["schema"] == harness.REPORT_SCHEMA
    expected_keys = ["schema", "config", "summary", "buckets_length", "buckets_shuffle",
                     "buckets_position", "buckets_displacement", "displacement_histogram",
                     "errors", "repairs"]
    assert list(loaded) == expected_keys


def test_csv_report_shape(mixed_corpus, tmp_path):
    report = evaluate(mixed_corpus, RandomOrderer(8), RunConfig("mixed", "random", seed=8))
    path = tmp_path / "r.csv"
    write_report(report, path, "csv")
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    n_buckets = (len(report.buckets_length) + len(report.buckets_shuffle)
                 + len(report.buckets_position.total)
                 + len(report.buckets_displacement.total)
                 + len(report.displacement_histogram))
    assert len(lines) == 1 + 1 + n_buckets  # header + summary + bucket rows


def test_markdown_report_renders(mixed_corpus, tmp_path):
    report = evaluate(mixed_corpus, RandomOrderer(8), RunConfig("mixed", "random", seed=8))
    path = tmp_path / "r.md"
    write_report(report, path, "markdown")
    text = path.read_text(encoding="utf-8")
    assert text.startswith("# Evaluation report")
    assert "## By sentence count" in text


def test_zero_shot_1x1_equals_plain_evaluate():
    corpus = generate_synthetic(200, 5, seed=81, name="zs")
    train_config = TrainConfig(seed=5)
    matrix = zero_shot([corpus], [corpus], train_config, seed=17)
    from order_bench.orderers import BTSortOrderer, train_pairwise

    orderer = BTSortOrderer(train_pairwise(corpus, train_config))
    report = evaluate(corpus, orderer, RunConfig("zs", "btsort", seed=17))
    assert matrix.cells[("zs", "zs")] == report.summary


def test_zero_shot_row_isolation():
    from order_bench.corpus import Corpus

    good = generate_synthetic(100, 5, seed=82, name="good")
    empty = Corpus(name="empty", documents=[], provenance="synthetic")
    matrix = zero_shot([good, empty], [good], TrainConfig(seed=1), seed=3)
    assert ("good", "good") in matrix.cells
    assert "empty" in matrix.row_errors
    payload = matrix.to_json()
    assert "error" in payload["matrix"]["empty"]


def test_zero_shot_markdown_shape(tmp_path):
    corpora = [generate_synthetic(60, 5, seed=s, name=f"c{s}") for s in (1, 2, 3)]
    matrix = zero_shot(corpora, corpora, TrainConfig(seed=1, epochs=1), seed=2)
    path = tmp_path / "m.md"
    write_report(matrix, path, "markdown")
    lines = [l for l in path.read_text(encoding="utf-8").splitlines() if l.startswith("|")]
    assert len(lines) == 2 + 3  # header + separator + 3 body rows
