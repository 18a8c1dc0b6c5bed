"""Deterministic seed derivation.

All randomness in the package flows through ``numpy.random.default_rng``
seeded with 64-bit integers derived here.  Derivation is a splitmix64 hash
chain, so that (a) per-replicate and per-trial seeds are decorrelated, and
(b) parallel and serial execution see exactly the same generators.
"""

from __future__ import annotations

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 mixing step (Steele, Lea, Flood 2014)."""
    x = (x + _GAMMA) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(base: int, *parts: int) -> int:
    """Mix ``base`` with any number of integer parts into a fresh 64-bit seed.

    The result depends on the order of the parts.  Negative parts are
    folded into the 64-bit ring first.
    """
    state = splitmix64(base & _MASK)
    for p in parts:
        state = splitmix64(state ^ (p & _MASK))
    return state


def content_key(text: str) -> int:
    """Stable 64-bit key of a string, independent of PYTHONHASHSEED.

    Used to key run blocks by content so that identical blocks receive
    identical trial seeds.
    """
    state = 0xCBF29CE484222325  # FNV-1a offset basis, then splitmix finish
    for b in text.encode("utf-8"):
        state = ((state ^ b) * 0x100000001B3) & _MASK
    return splitmix64(state)
