"""The codec's encoding contract, pinned by golden files.

The same files are byte-checked by the adapter package's independent
encoder, so both components prove compatibility against one artifact.
"""

import json
from pathlib import Path

import pytest

from order_bench import codec, harness
from order_bench.codec import MarkerMode
from order_bench.corpus import load_corpus

GOLDEN_DIR = Path(__file__).parent.parent / "adapter" / "tests" / "golden"


@pytest.mark.parametrize("mode", ["seq", "random", "none"])
def test_encoding_matches_golden_files(mode):
    corpus = load_corpus(GOLDEN_DIR / "corpus.jsonl")
    lines = []
    for doc in corpus:
        instance = harness.make_instance(doc, 11)
        marked = codec.encode_input(instance, MarkerMode.parse(mode, seed=11))
        lines.append(json.dumps({
            "id": instance.id,
            "n": instance.n,
            "text": marked.text,
            "markers": list(marked.marker_of_slot),
            "gold_output": codec.gold_output_text(instance, marked.marker_of_slot),
        }, ensure_ascii=False))
    golden = (GOLDEN_DIR / f"encode-{mode}.jsonl").read_text(encoding="utf-8")
    assert "".join(line + "\n" for line in lines) == golden
