"""order-bench: a sentence-ordering evaluation toolkit.

Marker codec, permutation metrics, baseline orderers (including a trainable
pairwise + greedy-topological decoder), a wire protocol for external
orderers, and a deterministic evaluation harness.
"""

__version__ = "0.1.0"
