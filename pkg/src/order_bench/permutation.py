"""Permutation algebra: shuffles, swap distance, inversions, displacement.

Permutations are 1-based throughout: a permutation of size n is a sequence
containing each of 1..n exactly once. Marker sequences (predicted and gold)
and the shuffle applied to a document are all values of this kind.
"""

from dataclasses import dataclass
from array import array
from fractions import Fraction
from typing import Sequence

from order_bench.corpus import Document
from order_bench.kernels import count_inversions_ranked, cycle_count
from order_bench.seeding import derive_rng

Permutation = tuple[int, ...]


def validate_permutation(p: Sequence[int]) -> None:
    n = len(p)
    if n < 1:
        raise ValueError("permutation must have size >= 1")
    if sorted(p) != list(range(1, n + 1)):
        raise ValueError(f"not a bijection on 1..{n}: {list(p)}")


def sample_shuffle(n: int, seed: int) -> Permutation:
    """Uniform random permutation of size n (identity permitted)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    values = list(range(1, n + 1))
    derive_rng("shuffle", seed).shuffle(values)
    return tuple(values)


def invert(p: Sequence[int]) -> Permutation:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v - 1] = i + 1
    return tuple(inv)


def min_swaps(p: Sequence[int]) -> int:
    """Minimum transpositions to sort p: n minus its cycle count."""
    validate_permutation(p)
    return len(p) - cycle_count(array("q", p))


def normalized_shuffle_degree(p: Sequence[int]) -> Fraction:
    """Swap distance divided by size; always in [0, 1)."""
    return Fraction(min_swaps(p), len(p))


def count_inversions(p: Sequence[int], reference: Sequence[int]) -> int:
    """Pairs (i, j), i < j, ordered oppositely in p relative to reference."""
    validate_permutation(p)
    validate_permutation(reference)
    if len(p) != len(reference):
        raise ValueError(f"size mismatch: {len(p)} vs {len(reference)}")
    rank_of = {v: r for r, v in enumerate(reference)}
    ranks = array("q", (rank_of[v] for v in p))
    return int(count_inversions_ranked(ranks))


@dataclass(frozen=True)
class ShuffledInstance:
    """A document together with the shuffle that produced its input order.

    ``gold_markers`` is Y*: gold_markers[i-1] is the slot of gold sentence i
    within the shuffled list, so gathering the shuffled sentences by Y*
    reproduces the document exactly.
    """

    doc: Document
    gold_markers: Permutation

    def __post_init__(self):
        validate_permutation(self.gold_markers)
        if len(self.gold_markers) != self.doc.n_sentences:
            raise ValueError(
                f"instance {self.doc.id!r}: marker size {len(self.gold_markers)} "
                f"!= sentence count {self.doc.n_sentences}"
            )

    @property
    def id(self) -> str:
        return self.doc.id

    @property
    def n(self) -> int:
        return self.doc.n_sentences

    @property
    def shuffled(self) -> tuple[str, ...]:
        """The shuffled sentence list S'."""
        out = [""] * self.n
        for i, slot in enumerate(self.gold_markers):
            out[slot - 1] = self.doc.sentences[i]
        return tuple(out)

    @property
    def shuffle_degree(self) -> Fraction:
        return normalized_shuffle_degree(self.gold_markers)


def shuffle_document(doc: Document, seed: int) -> ShuffledInstance:
    """Shuffle a document with a uniform seeded permutation."""
    return ShuffledInstance(doc=doc, gold_markers=sample_shuffle(doc.n_sentences, seed))


def relative_displacement(i: int, instance: ShuffledInstance) -> Fraction:
    """|i - j| / n where gold sentence i sits at shuffled slot j."""
    if not 1 <= i <= instance.n:
        raise IndexError(f"position {i} out of range 1..{instance.n}")
    j = instance.gold_markers[i - 1]
    return Fraction(abs(i - j), instance.n)
