"""Shared fixtures: subprocess helpers for both CLIs and one trained model
artifact reused across the serve/acceptance tests."""

import subprocess
import sys
import time
from pathlib import Path

import pytest

GOLDEN_DIR = Path(__file__).parent / "golden"


def run_primary(args, **kw):
    """Invoke the benchmark CLI; the adapter only talks to it this way."""
    return subprocess.run([sys.executable, "-m", "order_bench", *args],
                          capture_output=True, text=True, **kw)


def run_adapter(args, **kw):
    return subprocess.run([sys.executable, "-m", "order_bench_adapter", *args],
                          capture_output=True, text=True, **kw)


@pytest.fixture(scope="session")
def overfit_artifact(tmp_path_factory):
    """32-document corpus, a model fine-tuned to memorize it, and how long
    training took. Corpus and instance seeds are fixed so the harness
    reproduces the training instances exactly."""
    root = tmp_path_factory.mktemp("overfit")
    corpus = root / "train32.jsonl"
    model_dir = root / "model"
    seed = 5
    r = run_primary(["gen-synthetic", "--docs", "32", "--sentences", "5",
                     "--seed", "101", "--out", str(corpus)])
    assert r.returncode == 0, r.stderr
    start = time.monotonic()
    r = run_adapter(["finetune", "--corpus", str(corpus), "--mode", "seq",
                     "--seed", str(seed), "--epochs", "300", "--lr", "5e-4",
                     "--out", str(model_dir)])
    assert r.returncode == 0, r.stderr
    train_seconds = time.monotonic() - start
    return {"corpus": corpus, "model_dir": model_dir, "seed": seed,
            "train_seconds": train_seconds}
