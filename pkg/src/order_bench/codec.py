"""Text-to-marker codec.

Encodes a shuffled instance as
``[shuffled] <S1> sent1 <S2> sent2 ... [orig]`` (single spaces between
segments), parses raw model output back into integer tokens, repairs
invalid token lists into valid permutations, and reconstructs ordered text.
"""

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from order_bench.permutation import Permutation, ShuffledInstance
from order_bench.seeding import derive_rng

BEGIN_TOKEN = "[shuffled]"
END_TOKEN = "[orig]"

_INT_RE = re.compile(r"\d+")


@dataclass(frozen=True)
class MarkerMode:
    """How sentence markers are assigned: sequential, random 0-100, or none."""

    kind: str  # "sequential" | "random" | "none"
    seed: Optional[int] = None

    @classmethod
    def sequential(cls) -> "MarkerMode":
        return cls(kind="sequential")

    @classmethod
    def random_labels(cls, seed: int) -> "MarkerMode":
        return cls(kind="random", seed=seed)

    @classmethod
    def none(cls) -> "MarkerMode":
        return cls(kind="none")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "MarkerMode":
        if text in ("seq", "sequential"):
            return cls.sequential()
        if text == "random":
            return cls.random_labels(seed)
        if text == "none":
            return cls.none()
        raise ValueError(f"unknown marker mode {text!r} (expected seq|random|none)")


@dataclass(frozen=True)
class MarkedInput:
    """Encoder input text plus the marker label assigned to each shuffled slot."""

    text: str
    marker_of_slot: tuple[int, ...]


@dataclass(frozen=True)
class RawPrediction:
    """Decoded integer tokens as emitted, possibly invalid."""

    tokens: tuple[int, ...]


def assign_markers(instance: ShuffledInstance, mode: MarkerMode) -> tuple[int, ...]:
    """Marker label for each shuffled slot 1..n under the given mode."""
    n = instance.n
    if mode.kind == "random":
        if n > 101:
            raise ValueError(
                f"random marker mode supports at most 101 sentences, got {n}"
            )
        rng = derive_rng("markers", mode.seed or 0, instance.id)
        return tuple(rng.sample(range(0, 101), n))
    # Sequential labels; mode "none" keeps the same implicit slot numbering.
    return tuple(range(1, n + 1))


def encode_input(instance: ShuffledInstance, mode: MarkerMode) -> MarkedInput:
    markers = assign_markers(instance, mode)
    parts = [BEGIN_TOKEN]
    for slot, sentence in enumerate(instance.shuffled, start=1):
        if mode.kind != "none":
            parts.append(f"<S{markers[slot - 1]}>")
        parts.append(sentence)
    parts.append(END_TOKEN)
    return MarkedInput(text=" ".join(parts), marker_of_slot=markers)


def parse_output(raw_text: str) -> RawPrediction:
    """Extract all base-10 integers in order; everything else is ignored."""
    return RawPrediction(tokens=tuple(int(m) for m in _INT_RE.findall(raw_text)))


def labels_to_slots(tokens: Sequence[int], marker_of_slot: Sequence[int]) -> list[int]:
    """Map emitted marker labels back to 1-based slots; unknown labels -> 0.

    The 0 sentinel is outside every valid slot range, so repair drops it.
    """
    slot_of = {label: slot for slot, label in enumerate(marker_of_slot, start=1)}
    return [slot_of.get(t, 0) for t in tokens]


def repair(raw: RawPrediction, n: int) -> Permutation:
    """Normalize an arbitrary token list into a valid permutation of 1..n.

    Drops out-of-range tokens, keeps first occurrences, truncates to n, then
    appends the missing values in ascending order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seen = set()
    kept = []
    for t in raw.tokens:
        if 1 <= t <= n and t not in seen:
            seen.add(t)
            kept.append(t)
            if len(kept) == n:
                break
    kept.extend(v for v in range(1, n + 1) if v not in seen)
    return tuple(kept)


def needs_repair(raw: RawPrediction, n: int) -> bool:
    return tuple(raw.tokens) != repair(raw, n)


def reconstruct(instance: ShuffledInstance, y: Sequence[int]) -> list[str]:
    """Gather shuffled sentences by position markers: element i is S'[y_i]."""
    if len(y) != instance.n:
        raise ValueError(f"marker sequence size {len(y)} != instance size {instance.n}")
    shuffled = instance.shuffled
    return [shuffled[slot - 1] for slot in y]


def gold_output_text(instance: ShuffledInstance, marker_of_slot: Sequence[int]) -> str:
    """The target string an ideal model emits: gold markers as labels."""
    return " ".join(str(marker_of_slot[slot - 1]) for slot in instance.gold_markers)
