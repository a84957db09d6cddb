"""Post-decoding verification with a 64-bit polynomial universal hash."""
from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..randomness import STREAM_VERIFY, derive_rng

HASH_BITS = 64
HASH_PRIME = (1 << 64) - 59


def hash_key(seed: int, frame: int) -> int:
    """Shared evaluation point in [1, prime) for one frame."""
    rng = derive_rng(seed, STREAM_VERIFY, frame)
    return int(rng.integers(1, HASH_PRIME, dtype=np.uint64))


def _words(bits: np.ndarray) -> list[int]:
    packed = np.packbits(np.asarray(bits, dtype=np.uint8) & 1)
    pad = (-packed.size) % 4
    if pad:
        packed = np.concatenate((packed, np.zeros(pad, dtype=np.uint8)))
    return packed.view(">u4").astype(np.uint64).tolist()


def poly_hash(bits: np.ndarray, key: int) -> int:
    """Horner evaluation of the 32-bit words, followed by the bit length, at `key` mod the prime."""
    if not 0 < key < HASH_PRIME:
        raise DomainError("hash key must lie in [1, 2**64 - 59)")
    acc = 0
    for w in _words(bits) + [int(np.asarray(bits).size)]:
        acc = (acc * key + int(w)) % HASH_PRIME
    return acc


def verify_blocks(alice_bits: np.ndarray, bob_bits: np.ndarray, key: int) -> bool:
    """True (pass) when the exchanged hashes agree; False means the frame is discarded."""
    alice_bits = np.asarray(alice_bits)
    bob_bits = np.asarray(bob_bits)
    if alice_bits.shape != bob_bits.shape:
        raise DomainError(f"bit strings differ in length ({alice_bits.size} vs {bob_bits.size})")
    return poly_hash(alice_bits, key) == poly_hash(bob_bits, key)
