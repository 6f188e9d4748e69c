"""Tiny helpers for sets stored as Python int bitmasks.

Idea sets and firm sets are kept as arbitrary-precision ints: bit b set means
member b is present.  Union/intersection are then single int ops, which is what
keeps the closure and counting code fast at n in the low thousands.
"""

from __future__ import annotations

from typing import Iterator, Sequence


def bit(i: int) -> int:
    return 1 << i


def popcount(mask: int) -> int:
    return mask.bit_count()


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit positions in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_list(mask: int) -> list[int]:
    return list(iter_bits(mask))


def mask_from(indices: Sequence[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def all_mask(n: int) -> int:
    return (1 << n) - 1


def is_subset(small: int, big: int) -> bool:
    return small & ~big == 0
