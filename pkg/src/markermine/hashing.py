"""64-bit FNV-1a string hashing, the frozen feature hash of the toolkit.

Every n-gram feature (word or character) is mapped to a bucket by hashing
the UTF-8 bytes of the n-gram string with FNV-1a (64 bit) and reducing the
result modulo the bucket count.  The hash is part of the model file
contract: two models built with the same configuration always agree on
feature ids, so serialized models are portable across runs and machines.

The vectorized helpers compute the same function over many byte windows at
once; they exist because character n-gram hashing dominates the language-id
cost of corpus filtering.
"""

from __future__ import annotations

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF

_OFFSET_U64 = np.uint64(FNV_OFFSET)
_PRIME_U64 = np.uint64(FNV_PRIME)


def fnv1a(text: str, state: int = FNV_OFFSET) -> int:
    """Hash the UTF-8 bytes of *text*, optionally continuing from *state*."""
    h = state
    for b in text.encode("utf-8"):
        h = ((h ^ b) * FNV_PRIME) & _U64
    return h


def bucket_of(text: str, bucket_count: int, state: int = FNV_OFFSET) -> int:
    return fnv1a(text, state) % bucket_count


def hash_windows(data: np.ndarray, n: int, state: int = FNV_OFFSET) -> np.ndarray:
    """FNV-1a over every length-*n* byte window of *data* (uint8 array).

    Returns a uint64 array of length ``len(data) - n + 1`` where entry ``i``
    equals ``fnv1a(data[i:i+n])`` continued from *state*.  Array uint64
    arithmetic wraps modulo 2**64 exactly as the scalar hash does.
    """
    count = len(data) - n + 1
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    data64 = data.astype(np.uint64)
    h = np.full(count, np.uint64(state), dtype=np.uint64)
    for k in range(n):
        h ^= data64[k : k + count]
        h *= _PRIME_U64
    return h
