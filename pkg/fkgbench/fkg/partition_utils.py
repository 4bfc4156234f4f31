"""Integer partitions, conjugation, and set partitions of {1..m} by block type."""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

from django.conf import settings
from sympy.utilities.iterables import multiset_partitions, partitions

from .errors import CapExceededError, FkgError

logger = logging.getLogger(__name__)

MAX_PARTITION_WEIGHT = getattr(settings, 'FKG_MAX_PARTITION_WEIGHT', 10)


@dataclass(frozen=True, order=True)
class Partition:
    parts: Tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, 'parts', parts)
        if not parts:
            raise FkgError("a partition needs at least one part")
        if any(p <= 0 for p in parts):
            raise FkgError(f"partition {list(parts)} has a non-positive part")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise FkgError(f"partition {list(parts)} is not weakly decreasing")

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def multiplicities(self) -> Counter:
        return Counter(self.parts)

    def __str__(self) -> str:
        return '(' + ','.join(str(p) for p in self.parts) + ')'


@dataclass(frozen=True)
class BlockSplit:
    """Set partition of {1..m}; blocks sorted by descending size, ties by smallest element."""

    blocks: Tuple[Tuple[int, ...], ...]

    @classmethod
    def canonical(cls, blocks: Sequence[Sequence[int]]) -> 'BlockSplit':
        ordered = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: (-len(b), b[0]))
        return cls(tuple(ordered))

    @property
    def partition(self) -> Partition:
        return Partition(tuple(len(b) for b in self.blocks))

    @property
    def m(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __str__(self) -> str:
        glue = '' if self.m < 10 else ','
        return '{' + '|'.join(glue.join(str(i) for i in b) for b in self.blocks) + '}'


def _require_weight(m: int) -> None:
    if m < 1:
        raise FkgError(f"m must be at least 1, got {m}")


def enumerate_partitions(m: int) -> List[Partition]:
    """All partitions of m in reverse lexicographic order: (m), (m-1,1), ..., (1^m)."""
    _require_weight(m)
    found = []
    for multiplicities in partitions(m):
        parts = []
        for part in sorted(multiplicities, reverse=True):
            parts.extend([part] * multiplicities[part])
        found.append(Partition(tuple(parts)))
    return sorted(found, reverse=True)


def conjugate(partition: Partition) -> Partition:
    parts = partition.parts
    return Partition(tuple(sum(1 for p in parts if p >= i) for i in range(1, parts[0] + 1)))


def split_count(partition: Partition) -> int:
    """card D(λ) = m! / (∏ λ_j! · ∏ mult_i(λ)!)."""
    denominator = math.prod(math.factorial(p) for p in partition.parts)
    denominator *= math.prod(math.factorial(k) for k in partition.multiplicities().values())
    return math.factorial(partition.weight) // denominator


@lru_cache(maxsize=None)
def _splits_of_type(parts: Tuple[int, ...]) -> Tuple[BlockSplit, ...]:
    m = sum(parts)
    wanted = sorted(parts)
    splits = [
        BlockSplit.canonical(blocks)
        for blocks in multiset_partitions(list(range(1, m + 1)), len(parts))
        if sorted(len(b) for b in blocks) == wanted
    ]
    splits.sort(key=lambda split: split.blocks)
    return tuple(splits)


def splits_of_type(partition: Partition) -> Tuple[BlockSplit, ...]:
    """Set partitions of {1..m} whose block sizes are ``partition``, in canonical order."""
    if partition.weight > MAX_PARTITION_WEIGHT:
        raise CapExceededError(
            f"m={partition.weight} exceeds FKG_MAX_PARTITION_WEIGHT={MAX_PARTITION_WEIGHT}"
        )
    splits = _splits_of_type(partition.parts)
    expected = split_count(partition)
    if len(splits) != expected:
        # The closed form is verified on every call, never trusted.
        raise FkgError(f"split enumeration for {partition} gave {len(splits)}, formula gives {expected}")
    return splits
