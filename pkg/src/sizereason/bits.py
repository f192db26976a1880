"""Small helpers for subsets encoded as integer bitmasks."""

from typing import Iterator


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def submasks(mask: int) -> Iterator[int]:
    """Yield every submask of ``mask``, including 0 and ``mask`` itself.

    Order is decreasing, ending with 0.
    """
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def supersets_within(lower: int, upper: int) -> Iterator[int]:
    """Yield every ``S`` with ``lower <= S <= upper`` in the subset order."""
    free = upper & ~lower
    for extra in submasks(free):
        yield lower | extra


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def popcount(mask: int) -> int:
    return mask.bit_count()
