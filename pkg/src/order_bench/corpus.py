"""Corpora of sentence-ordering documents: loading, splitting, synthesis.

The on-disk format is UTF-8 JSON lines, one document per line:
``{"id": <string>, "sentences": [<string>, ...]}`` with sentences in gold
(coherent) order.
"""

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Union

from order_bench.seeding import derive_rng


class CorpusError(ValueError):
    """Malformed corpus data (bad record, empty sentence, duplicate id)."""


@dataclass(frozen=True)
class Document:
    """One document: sentences in gold coherent order."""

    id: str
    sentences: tuple[str, ...]

    def __post_init__(self):
        if len(self.sentences) < 1:
            raise CorpusError(f"document {self.id!r} has no sentences")
        for s in self.sentences:
            if not s.strip():
                raise CorpusError(f"document {self.id!r} contains an empty sentence")

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)


@dataclass
class Corpus:
    name: str
    documents: list[Document]
    provenance: str = "loaded"  # "loaded" or "synthetic"

    def __post_init__(self):
        ids = [d.id for d in self.documents]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise CorpusError(f"duplicate document id {dup!r} in corpus {self.name!r}")

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


@dataclass(frozen=True)
class SplitSpec:
    """Train/dev/test ratios (must sum exactly to 1) plus a shuffle seed."""

    train_ratio: Fraction
    dev_ratio: Fraction
    test_ratio: Fraction
    seed: int

    def __post_init__(self):
        ratios = (self.train_ratio, self.dev_ratio, self.test_ratio)
        if any(r <= 0 for r in ratios):
            raise ValueError("split ratios must be strictly positive")
        if sum(ratios) != 1:
            raise ValueError(f"split ratios must sum to 1, got {sum(ratios)}")


def _parse_record(line: str, lineno: int, seen_ids: set) -> Document:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusError(f"line {lineno}: invalid JSON ({e.msg})") from e
    if not isinstance(obj, dict) or "id" not in obj or "sentences" not in obj:
        raise CorpusError(f'line {lineno}: record must have "id" and "sentences"')
    doc_id = obj["id"]
    sentences = obj["sentences"]
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"line {lineno}: id must be a non-empty string")
    if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
        raise CorpusError(f"line {lineno} (id {doc_id!r}): sentences must be a list of strings")
    trimmed = tuple(s.strip() for s in sentences)
    if not trimmed:
        raise CorpusError(f"line {lineno} (id {doc_id!r}): no sentences")
    if any(not s for s in trimmed):
        raise CorpusError(f"line {lineno} (id {doc_id!r}): empty sentence after trimming")
    if doc_id in seen_ids:
        raise CorpusError(f"line {lineno}: duplicate document id {doc_id!r}")
    seen_ids.add(doc_id)
    return Document(id=doc_id, sentences=trimmed)


def load_corpus(path: Union[str, Path], name: Optional[str] = None) -> Corpus:
    """Load a JSON-lines corpus; documents keep file order."""
    path = Path(path)
    if name is None:
        name = path.stem
    documents = []
    seen_ids: set = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            documents.append(_parse_record(line, lineno, seen_ids))
    return Corpus(name=name, documents=documents, provenance="loaded")


def save_corpus(corpus: Corpus, path: Union[str, Path]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            rec = {"id": doc.id, "sentences": list(doc.sentences)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def truncate(doc: Document, max_sentences: int) -> Document:
    """Keep the first min(n, max_sentences) sentences; id preserved."""
    if max_sentences < 1:
        raise ValueError("max_sentences must be >= 1")
    if doc.n_sentences <= max_sentences:
        return doc
    return Document(id=doc.id, sentences=doc.sentences[:max_sentences])


def split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Deterministic disjoint train/dev/test partition.

    Dev and test sizes are floor-rounded; the remainder goes to train.
    Documents keep their original corpus order within each split.
    """
    n = len(corpus)
    if n == 0:
        raise CorpusError(f"corpus {corpus.name!r} is empty")
    n_dev = int(n * spec.dev_ratio)
    n_test = int(n * spec.test_ratio)
    n_train = n - n_dev - n_test
    if min(n_train, n_dev, n_test) == 0:
        raise CorpusError(
            f"corpus of {n} documents cannot honor ratios "
            f"{spec.train_ratio}:{spec.dev_ratio}:{spec.test_ratio} without an empty split"
        )
    order = list(range(n))
    derive_rng("corpus-split", spec.seed, corpus.name).shuffle(order)
    picks = {
        "train": sorted(order[:n_train]),
        "dev": sorted(order[n_train:n_train + n_dev]),
        "test": sorted(order[n_train + n_dev:]),
    }
    parts = []
    for part, idxs in picks.items():
        parts.append(
            Corpus(
                name=f"{corpus.name}.{part}",
                documents=[corpus.documents[i] for i in idxs],
                provenance=corpus.provenance,
            )
        )
    return tuple(parts)


# Cue vocabularies for synthetic corpora. Each scheme marks every sentence
# with vocabulary unique to its position so gold order is recoverable from
# surface features alone. Schemes share no content tokens, which gives the
# zero-shot harness a transfer / no-transfer contrast to work with.
_ORDINALS_NARRATIVE = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
    "eighth", "ninth", "tenth", "eleventh", "twelfth", "thirteenth",
    "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth",
    "nineteenth", "twentieth",
]
_CODES_PROCEDURAL = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
    "hotel", "india", "juliett", "kilo", "lima", "mike", "november",
    "oscar", "papa", "quebec", "romeo", "sierra", "tango",
]

_CUE_SCHEMES = {
    0: {
        "openers": ["To begin,", "Right away,", "Early on,"],
        "middles": ["After that,", "Soon after,", "Later on,", "Following that,"],
        "closers": ["At last,", "In closing,", "Before bed,"],
        "marks": _ORDINALS_NARRATIVE,
        "entities": ["Mara", "Theo", "Ines", "Ravi", "Bettina", "Oluwaseun",
                     "Petra", "Dmitri", "Yuki", "Camille", "Ezra", "Solveig"],
        "surnames": ["Okafor", "Lindqvist", "Marchetti", "Tanaka", "Duval",
                     "Haugen", "Castellanos", "Novak", "Iyer", "Bergstrom"],
        "verbs": ["finished", "tackled", "handled", "sorted", "wrapped"],
        "template": "{conn} {entity} {verb} the {mark} chore of the day.",
    },
    1: {
        "openers": ["Kickoff checkpoint:", "Launch checkpoint:"],
        "middles": ["Relay continues:", "Sequence advances:", "Progress logged:",
                    "Milestones accumulate:"],
        "closers": ["Terminal checkpoint:", "Shutdown checkpoint:"],
        "marks": _CODES_PROCEDURAL,
        "entities": ["Zorak", "Quillon", "Vexa", "Brontes", "Kyralis",
                     "Morvaine", "Teslin", "Ondrix", "Phaelor", "Wrenna"],
        "surnames": ["Xanthe", "Drossel", "Veymar", "Korrin", "Ashvale",
                     "Thorne", "Ferrix", "Oblast", "Junier", "Skarn"],
        "verbs": ["logs", "stamps", "registers", "records"],
        "template": "{conn} operator {entity} {verb} milestone {mark} during shift.",
    },
}


def generate_synthetic(
    n_docs: int,
    sentences_per_doc: int,
    seed: int,
    cue_scheme: int = 0,
    name: Optional[str] = None,
) -> Corpus:
    """Deterministic synthetic corpus with position-revealing lexical cues.

    Sentence k of every document carries a connective chosen by position band
    and a position-unique content word, so a surface-feature model can recover
    gold order; a per-document entity name varies the remaining text.
    """
    if n_docs < 1 or sentences_per_doc < 1:
        raise ValueError("n_docs and sentences_per_doc must be positive")
    scheme = _CUE_SCHEMES.get(cue_scheme)
    if scheme is None:
        raise ValueError(f"unknown cue scheme {cue_scheme!r}")
    if sentences_per_doc > len(scheme["marks"]):
        raise ValueError(
            f"cue scheme {cue_scheme} supports at most {len(scheme['marks'])} sentences"
        )
    rng = derive_rng("synthetic", seed, f"scheme={cue_scheme}")
    documents = []
    for d in range(n_docs):
        entity = f"{rng.choice(scheme['entities'])} {rng.choice(scheme['surnames'])}"
        sentences = []
        for k in range(1, sentences_per_doc + 1):
            if k == 1:
                conn = scheme["openers"][rng.randrange(len(scheme["openers"]))]
            elif k == sentences_per_doc:
                conn = scheme["closers"][rng.randrange(len(scheme["closers"]))]
            else:
                conn = scheme["middles"][(k - 2) % len(scheme["middles"])]
            sentences.append(
                scheme["template"].format(
                    conn=conn,
                    entity=entity,
                    verb=rng.choice(scheme["verbs"]),
                    mark=scheme["marks"][k - 1],
                )
            )
        documents.append(Document(id=f"syn-{cue_scheme}-{seed}-{d:05d}", sentences=tuple(sentences)))
    if name is None:
        name = f"synthetic-s{cue_scheme}-{seed}"
    return Corpus(name=name, documents=documents, provenance="synthetic")
