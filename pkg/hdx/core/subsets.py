"""Bitmask helpers for subsets S of [k].

Subsets are plain ints; bit i set means coordinate i (0-based) belongs to S.
Enumeration order is always ascending integer order, which is the canonical
order used for every sum over subsets.
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator

from .errors import InvalidParameter

MAX_K = 12


def full_mask(k: int) -> int:
    return (1 << k) - 1


def mask_from(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        if i < 0:
            raise InvalidParameter(f"negative coordinate index {i}")
        mask |= 1 << int(i)
    return mask


def bits(mask: int) -> tuple[int, ...]:
    """Coordinates of ``mask`` in increasing order."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def size(mask: int) -> int:
    return bin(mask).count("1")


def validate(mask: int, k: int) -> int:
    if mask < 0 or mask >> k:
        raise InvalidParameter(f"subset {mask:#b} has bits beyond k={k}")
    return mask


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def subsets_of(mask: int) -> Iterator[int]:
    """All subsets of ``mask`` in ascending integer order."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def supersets_within(mask: int, k: int) -> Iterator[int]:
    """All T with mask ⊆ T ⊆ [k], ascending."""
    rest = full_mask(k) & ~mask
    for extra in subsets_of(rest):
        yield mask | extra


def all_subsets(k: int, max_size: int | None = None) -> Iterator[int]:
    for mask in range(1 << k):
        if max_size is None or size(mask) <= max_size:
            yield mask


def by_size(k: int, max_size: int | None = None) -> list[int]:
    """Subsets ordered by (|S|, mask); the witness order for globalness."""
    return sorted(all_subsets(k, max_size), key=lambda m: (size(m), m))


def fmt(mask: int) -> str:
    """Human-readable 1-based label, e.g. ``{1,3}``."""
    return "{" + ",".join(str(i + 1) for i in bits(mask)) + "}"


def relative(mask: int, coords: tuple[int, ...]) -> int:
    """Re-index ``mask`` (over original coordinates) into positions of ``coords``."""
    out = 0
    for pos, c in enumerate(coords):
        if mask >> c & 1:
            out |= 1 << pos
    return out


__all__ = [
    "MAX_K",
    "full_mask",
    "mask_from",
    "bits",
    "size",
    "validate",
    "is_subset",
    "subsets_of",
    "supersets_within",
    "all_subsets",
    "by_size",
    "fmt",
    "relative",
]
