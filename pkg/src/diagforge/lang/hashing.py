"""Deterministic 64-bit structural hashing.

Python's builtin ``hash`` is salted per process, so machine-state hashes and
cycle certificates would not be reproducible across runs.  Everything here is
a pure function of the bytes hashed: strings go through blake2b, structure is
folded with the splitmix64 finalizer.
"""

from __future__ import annotations

from hashlib import blake2b

from .rng import MASK64, mix64


def h_str(s: str) -> int:
    return int.from_bytes(blake2b(s.encode("utf-8"), digest_size=8).digest(), "big")


def h_int(i: int) -> int:
    return mix64(i & MASK64)


def h_fold(tag: int, *parts: int) -> int:
    h = mix64(tag)
    for p in parts:
        h = mix64(h ^ p)
    return h
