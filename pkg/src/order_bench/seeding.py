"""Stable, namespaced derivation of per-instance RNG seeds.

Python's builtin ``hash`` is salted per process, so every seed that must be
reproducible across runs and machines is derived with BLAKE2b instead.
"""

import hashlib
import random


def derive_seed(namespace: str, seed: int, key: str = "") -> int:
    """64-bit seed derived from (namespace, seed, key), stable everywhere."""
    material = f"{namespace}\x1f{seed}\x1f{key}".encode("utf-8")
    digest = hashlib.blake2b(material, digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_rng(namespace: str, seed: int, key: str = "") -> random.Random:
    return random.Random(derive_seed(namespace, seed, key))
