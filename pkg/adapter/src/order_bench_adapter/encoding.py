"""Independent reimplementation of the benchmark's text-to-marker encoding.

The benchmark publishes its encoding as a contract: instance shuffles and
marker labels are derived from BLAKE2b-seeded Mersenne Twister streams, and
the encoder input is ``[shuffled] <S1> sent1 ... [orig]``. This module
rebuilds that contract from scratch so training pairs are byte-identical to
what the harness sends over the wire (checked by golden-file tests against
``order-bench encode``).
"""

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

BEGIN_TOKEN = "[shuffled]"
END_TOKEN = "[orig]"
MARKER_MODES = ("seq", "random", "none")


class EncodingError(ValueError):
    """Bad corpus record or marker-mode constraint violation."""


def derive_seed(namespace: str, seed: int, key: str = "") -> int:
    material = f"{namespace}\x1f{seed}\x1f{key}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(material, digest_size=8).digest(), "big")


def load_documents(path: Union[str, Path]) -> list[tuple[str, tuple[str, ...]]]:
    """Read a JSON-lines corpus as (id, sentences) pairs in file order."""
    docs = []
    seen = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise EncodingError(f"line {lineno}: invalid JSON ({e.msg})") from e
            doc_id = obj.get("id")
            sentences = obj.get("sentences")
            if not isinstance(doc_id, str) or not isinstance(sentences, list):
                raise EncodingError(f'line {lineno}: record must have "id" and "sentences"')
            trimmed = tuple(s.strip() for s in sentences)
            if not trimmed or any(not s for s in trimmed) or doc_id in seen:
                raise EncodingError(f"line {lineno}: bad document {doc_id!r}")
            seen.add(doc_id)
            docs.append((doc_id, trimmed))
    return docs


def gold_markers(doc_id: str, n: int, seed: int) -> tuple[int, ...]:
    """The harness's seeded shuffle Y* for a document: Y*[i-1] is the slot
    of gold sentence i in the shuffled list."""
    shuffle_seed = derive_seed("instance", seed, doc_id)
    values = list(range(1, n + 1))
    random.Random(derive_seed("shuffle", shuffle_seed)).shuffle(values)
    return tuple(values)


def marker_labels(doc_id: str, n: int, mode: str, seed: int) -> tuple[int, ...]:
    """Marker label for each shuffled slot 1..n under the given mode."""
    if mode not in MARKER_MODES:
        raise EncodingError(f"unknown marker mode {mode!r} (expected seq|random|none)")
    if mode == "random":
        if n > 101:
            raise EncodingError(f"random marker mode supports at most 101 sentences, got {n}")
        rng = random.Random(derive_seed("markers", seed, doc_id))
        return tuple(rng.sample(range(0, 101), n))
    return tuple(range(1, n + 1))


@dataclass(frozen=True)
class TrainingPair:
    """One encoder input / gold marker-string target, plus its provenance."""

    id: str
    n: int
    text: str
    markers: tuple[int, ...]
    target: str

    def to_json(self) -> dict:
        # Field-for-field the `order-bench encode` record layout.
        return {
            "id": self.id,
            "n": self.n,
            "text": self.text,
            "markers": list(self.markers),
            "gold_output": self.target,
        }


def input_text(shuffled: Sequence[str], markers: Sequence[int], mode: str) -> str:
    parts = [BEGIN_TOKEN]
    for slot, sentence in enumerate(shuffled, start=1):
        if mode != "none":
            parts.append(f"<S{markers[slot - 1]}>")
        parts.append(sentence)
    parts.append(END_TOKEN)
    return " ".join(parts)


def target_text(y_gold: Sequence[int], markers: Sequence[int]) -> str:
    return " ".join(str(markers[slot - 1]) for slot in y_gold)


def encode_document(doc_id: str, sentences: Sequence[str], mode: str, seed: int,
                    max_sentences: Optional[int] = None) -> TrainingPair:
    if max_sentences is not None:
        sentences = sentences[:max_sentences]
    n = len(sentences)
    y_gold = gold_markers(doc_id, n, seed)
    shuffled = [""] * n
    for i, slot in enumerate(y_gold):
        shuffled[slot - 1] = sentences[i]
    markers = marker_labels(doc_id, n, mode, seed)
    return TrainingPair(
        id=doc_id,
        n=n,
        text=input_text(shuffled, markers, mode),
        markers=markers,
        target=target_text(y_gold, markers),
    )


def build_training_pairs(corpus_path: Union[str, Path], mode: str, seed: int,
                         max_sentences: Optional[int] = None) -> list[TrainingPair]:
    """Encode every document of a corpus file into an (input, target) pair."""
    docs = load_documents(corpus_path)
    if not docs:
        raise EncodingError(f"corpus {corpus_path} is empty")
    return [encode_document(doc_id, sents, mode, seed, max_sentences)
            for doc_id, sents in docs]
