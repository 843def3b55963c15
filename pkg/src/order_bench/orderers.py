"""Orderers: baselines, the trainable pairwise + greedy-topological decoder,
and the client for external orderers speaking the wire protocol.

Every orderer maps a ShuffledInstance to a valid permutation Y of its size.
"""

import math
import re
import threading
import zlib
from array import array
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from order_bench import codec
from order_bench.codec import MarkerMode
from order_bench.corpus import Corpus
from order_bench.permutation import Permutation, ShuffledInstance, sample_shuffle
from order_bench.seeding import derive_rng
from order_bench.kernels import logistic_sgd_epoch
from order_bench import wire


class OrdererError(RuntimeError):
    """Per-instance ordering failure (transport, protocol, timeout)."""


class Orderer:
    """Contract: order() returns a valid permutation of the instance size."""

    name = "orderer"

    def order(self, instance: ShuffledInstance) -> Permutation:
        raise NotImplementedError

    def order_detailed(self, instance: ShuffledInstance) -> tuple[Permutation, bool]:
        """Like order(), plus whether the raw output needed repair."""
        return self.order(instance), False


class IdentityOrderer(Orderer):
    """Predicts the shuffled order is already correct: Y = [1..n]."""

    name = "identity"

    def order(self, instance: ShuffledInstance) -> Permutation:
        return tuple(range(1, instance.n + 1))


class RandomOrderer(Orderer):
    """Uniform random permutation, keyed by (seed, instance id)."""

    name = "random"

    def __init__(self, seed: int):
        self.seed = seed

    def order(self, instance: ShuffledInstance) -> Permutation:
        values = list(range(1, instance.n + 1))
        derive_rng("random-orderer", self.seed, instance.id).shuffle(values)
        return tuple(values)


class GoldOrderer(Orderer):
    """Oracle: returns Y* exactly."""

    name = "gold"

    def order(self, instance: ShuffledInstance) -> Permutation:
        return instance.gold_markers


_WORD_RE = re.compile(r"[a-z0-9']+")


def _tokens(sentence: str) -> list[str]:
    return _WORD_RE.findall(sentence.lower())


def pair_features(first: str, second: str) -> list[str]:
    """Sparse lexical features describing an ordered sentence pair."""
    a = _tokens(first)
    b = _tokens(second)
    feats = {f"a:{w}" for w in a} | {f"b:{w}" for w in b}
    if a:
        feats.add(f"a_first:{a[0]}")
        feats.add(f"a_last:{a[-1]}")
    if b:
        feats.add(f"b_first:{b[0]}")
        feats.add(f"b_last:{b[-1]}")
    diff = len(a) - len(b)
    feats.add(f"len_sign:{(diff > 0) - (diff < 0)}")
    return sorted(feats)


def _hash_features(feats: Sequence[str], dim: int) -> list[int]:
    # crc32 is stable across processes and platforms, unlike builtin hash().
    return sorted({zlib.crc32(f.encode("utf-8")) % dim for f in feats})


@dataclass
class PairwiseModel:
    """Logistic precedence model over hashed sparse pair features."""

    hash_dim: int
    weights: array
    bias: float = 0.0

    @classmethod
    def zeros(cls, hash_dim: int) -> "PairwiseModel":
        return cls(hash_dim=hash_dim, weights=array("d", bytes(8 * hash_dim)))

    def precedes_probability(self, first: str, second: str) -> float:
        """P(first precedes second in gold order)."""
        z = self.bias
        for idx in _hash_features(pair_features(first, second), self.hash_dim):
            z += self.weights[idx]
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        ez = math.exp(z)
        return ez / (1.0 + ez)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 4
    learning_rate: float = 0.5
    seed: int = 0
    hash_dim: int = 1 << 18
    corrupt_targets: bool = False  # train against a fresh random order per doc


def train_pairwise(train: Corpus, config: TrainConfig) -> PairwiseModel:
    """Train the precedence model on all ordered sentence pairs of the corpus.

    Each gold-ordered pair (s_i, s_j), i < j, yields a positive example and
    its reversal a negative one; SGD visits rows in a seeded shuffled order.
    With corrupt_targets set, pair labels come from a fresh random permutation
    of each document instead of gold order.
    """
    if len(train) == 0:
        raise ValueError("cannot train on an empty corpus")
    model = PairwiseModel.zeros(config.hash_dim)
    indices: list[int] = []
    indptr = [0]
    labels: list[int] = []
    corrupt_rng = derive_rng("corrupt-targets", config.seed)
    for doc in train:
        order = list(doc.sentences)
        if config.corrupt_targets:
            target = list(sample_shuffle(len(order), corrupt_rng.getrandbits(63)))
            order = [order[t - 1] for t in target]
        for i in range(len(order)):
            for j in range(i + 1, len(order)):
                for a, b, y in ((order[i], order[j], 1), (order[j], order[i], 0)):
                    indices.extend(_hash_features(pair_features(a, b), config.hash_dim))
                    indptr.append(len(indices))
                    labels.append(y)
    indices_a = array("q", indices)
    indptr_a = array("q", indptr)
    labels_a = array("b", labels)
    rng = derive_rng("pairwise-train", config.seed)
    n_rows = len(labels)
    for _ in range(config.epochs):
        visit = list(range(n_rows))
        rng.shuffle(visit)
        model.bias = logistic_sgd_epoch(
            indices_a, indptr_a, labels_a, array("q", visit),
            model.weights, model.bias, config.learning_rate,
        )
    return model


def btsort_decode(n: int, precedes: Callable[[int, int], float]) -> Permutation:
    """Greedy tournament decode over a pairwise precedence function.

    precedes(i, j) gives P(slot i precedes slot j), slots 1-based. Each round
    emits the remaining slot with the highest sum of positive margins over
    the other remaining slots; ties break by ascending slot index. The result
    depends only on margin comparisons, so any positive rescaling of margins
    leaves it unchanged.
    """
    margins = [[0.0] * (n + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                p = precedes(i, j)
                margins[i][j] = p - 0.5 if p > 0.5 else 0.0
    remaining = list(range(1, n + 1))
    out = []
    while remaining:
        best = max(
            remaining,
            key=lambda i: (sum(margins[i][j] for j in remaining if j != i), -i),
        )
        out.append(best)
        remaining.remove(best)
    return tuple(out)


class BTSortOrderer(Orderer):
    """Pairwise precedence classifier + greedy topological decode."""

    name = "btsort"

    def __init__(self, model: PairwiseModel):
        self.model = model

    def order(self, instance: ShuffledInstance) -> Permutation:
        shuffled = instance.shuffled

        def precedes(i: int, j: int) -> float:
            return self.model.precedes_probability(shuffled[i - 1], shuffled[j - 1])

        return btsort_decode(instance.n, precedes)


class ExternalOrderer(Orderer):
    """Client for an endpoint speaking the order-bench/1 wire protocol.

    One connection per worker thread; transport or protocol failures raise
    OrdererError so the harness can record the instance as errored and
    continue.
    """

    def __init__(self, endpoint: str, mode: Optional[MarkerMode] = None,
                 timeout: Optional[float] = None):
        self.endpoint = endpoint
        self.mode = mode or MarkerMode.sequential()
        self.timeout = timeout
        self.name = f"external:{endpoint}"
        self._local = threading.local()
        self._lock = threading.Lock()
        self._connect_error: Optional[str] = None

    def _connection(self) -> wire.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            with self._lock:
                if self._connect_error is not None:
                    raise OrdererError(self._connect_error)
            try:
                conn = wire.Connection(self.endpoint, timeout=self.timeout)
            except (wire.TransportError, wire.ProtocolError, ValueError) as e:
                with self._lock:
                    self._connect_error = f"endpoint {self.endpoint!r} unavailable: {e}"
                raise OrdererError(self._connect_error) from e
            self._local.conn = conn
            self.name = f"external:{conn.endpoint_name}"
        return conn

    def handshake(self) -> str:
        """Eagerly connect; returns the endpoint's self-reported name."""
        return self._connection().endpoint_name

    def order(self, instance: ShuffledInstance) -> Permutation:
        return self.order_detailed(instance)[0]

    def order_detailed(self, instance: ShuffledInstance) -> tuple[Permutation, bool]:
        conn = self._connection()
        marked = codec.encode_input(instance, self.mode)
        try:
            output = conn.request(
                instance.id, marked.text, instance.n, marked.marker_of_slot
            )
        except (wire.TransportError, wire.ProtocolError) as e:
            self._local.conn = None
            conn.close()
            raise OrdererError(f"instance {instance.id!r}: {e}") from e
        raw = codec.parse_output(output)
        slots = codec.RawPrediction(
            tokens=tuple(codec.labels_to_slots(raw.tokens, marked.marker_of_slot))
        )
        repaired = codec.needs_repair(slots, instance.n)
        return codec.repair(slots, instance.n), repaired

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None
