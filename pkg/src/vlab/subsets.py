"""Bit-mask subsets of a finite ground set.

A constraint set is a plain ``int`` whose bit ``i`` marks membership of
constraint ``i``.  Union, intersection and difference are ``|``, ``&`` and
``& ~``.  Everything here iterates in ascending index order, and subsets are
compared lexicographically by their sorted index sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

ConstraintSet = int

MAX_EXACT_SUBSETS = 20
MAX_EXACT_PAIRS = 16


@dataclass(frozen=True)
class GroundSet:
    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("ground set size must be nonnegative")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("need exactly one label per constraint")

    @property
    def full(self) -> ConstraintSet:
        return full_mask(self.n)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def format(self, mask: ConstraintSet) -> str:
        return "{" + ", ".join(self.label(i) for i in indices(mask)) + "}"


def full_mask(n: int) -> ConstraintSet:
    return (1 << n) - 1


def popcount(mask: ConstraintSet) -> int:
    return mask.bit_count()


def from_indices(items: Iterable[int]) -> ConstraintSet:
    mask = 0
    for i in items:
        if i < 0:
            raise ValueError(f"negative index {i}")
        mask |= 1 << i
    return mask


def indices(mask: ConstraintSet) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def lex_key(mask: ConstraintSet) -> tuple[int, ...]:
    """Sort key realising the lexicographic order on index sequences."""
    return tuple(indices(mask))


def is_subset(a: ConstraintSet, b: ConstraintSet) -> bool:
    return a & ~b == 0


def lowest(mask: ConstraintSet) -> int:
    if not mask:
        raise ValueError("empty set has no lowest element")
    return (mask & -mask).bit_length() - 1


def all_masks(n: int) -> range:
    return range(1 << n)


def submasks(mask: ConstraintSet) -> Iterator[ConstraintSet]:
    """All subsets of ``mask``, including ``0`` and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def proper_submasks(mask: ConstraintSet) -> Iterator[ConstraintSet]:
    for sub in submasks(mask):
        if sub != mask:
            yield sub


def k_subsets(mask: ConstraintSet, k: int) -> Iterator[ConstraintSet]:
    """Subsets of ``mask`` with exactly ``k`` elements, in lexicographic order."""
    for combo in combinations(indices(mask), k):
        yield from_indices(combo)


def r_subsets(n: int, r: int) -> Iterator[ConstraintSet]:
    """All ``r``-element subsets of ``{0..n-1}`` in lexicographic order."""
    for combo in combinations(range(n), r):
        yield from_indices(combo)


def lex_ordered_small_subsets(items: Sequence[int], max_size: int) -> Iterator[tuple[int, ...]]:
    """Nonempty subsets of sorted ``items`` with at most ``max_size`` elements.

    Yields in lexicographic order of the index tuples, i.e. depth-first prefix
    order: (a), (a, b), (a, b, c), (a, c), (b), ...
    """
    def walk(prefix: tuple[int, ...], start: int) -> Iterator[tuple[int, ...]]:
        for j in range(start, len(items)):
            cur = prefix + (items[j],)
            yield cur
            if len(cur) < max_size:
                yield from walk(cur, j + 1)

    yield from walk((), 0)
