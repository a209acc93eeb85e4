"""Closed-form space families: d-smallest number, smallest number with
repetitions, and the all-extreme consistent space."""

from __future__ import annotations

from bisect import bisect_left
from typing import Sequence

from ..spaces import ViolatorOracle
from ..subsets import full_mask, indices, lowest

NEG_INF = float("-inf")


class DSmallestOracle(ViolatorOracle):
    """``H = {1..n}`` (index ``i`` carries value ``i + 1``); ``V(R)`` are the
    non-members below the ``d``-th smallest element of ``R``.

    Sets with fewer than ``d`` elements have no ``d``-th smallest element.
    ``small_sets="all"`` lets every non-member violate them (the reading
    under which the family is a violator space); ``"empty"`` gives them no
    violators, which keeps consistency but breaks locality.
    """

    def __init__(self, n: int, d: int, *, small_sets: str = "all"):
        if not 1 <= d <= n:
            raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
        if small_sets not in ("all", "empty"):
            raise ValueError("small_sets must be 'all' or 'empty'")
        labels = [str(i + 1) for i in range(n)] if n <= 64 else None
        super().__init__(n, labels)
        self.d = d
        self.small_sets = small_sets
        self.known_dimension = d
        self.objective = self._objective

    def _objective(self, G):
        members = indices(G)
        if len(members) < self.d:
            return NEG_INF
        return -(members[self.d - 1] + 1)

    def evaluate(self, G):
        members = _first_bits(G, self.d)
        if len(members) < self.d:
            return full_mask(self.n) & ~G if self.small_sets == "all" else 0
        return ((1 << members[self.d - 1]) - 1) & ~G

    def count_violators_sorted(self, members):
        if len(members) < self.d:
            return self.n - len(members) if self.small_sets == "all" else 0
        return members[self.d - 1] - (self.d - 1)

    def designated_basis(self, members):
        return tuple(members[: self.d])


def _first_bits(mask: int, k: int) -> list[int]:
    out = []
    while mask and len(out) < k:
        low = lowest(mask)
        out.append(low)
        mask &= ~(1 << low)
    return out


def d_smallest_oracle(n: int, d: int, *, small_sets: str = "all") -> DSmallestOracle:
    return DSmallestOracle(n, d, small_sets=small_sets)


class RepetitionsOracle(ViolatorOracle):
    """Smallest number with repetitions: one constraint per occurrence of a
    value; ``V(R)`` are the occurrences with value below ``min(R)``.

    ``empty`` selects ``V(empty)``: ``"all"`` for the whole ground set, or an
    index ``i`` for ``V(empty) = V({i})``.  The latter satisfies locality only
    when ``values[i]`` is the maximum value.
    """

    def __init__(self, values: Sequence[int], *, empty="all"):
        values = [int(v) for v in values]
        super().__init__(len(values), [str(v) for v in values] if len(values) <= 64 else None)
        if empty != "all" and not (isinstance(empty, int) and 0 <= empty < len(values)):
            raise ValueError("empty must be 'all' or a valid index")
        self.values = values
        self.empty = empty
        self._sorted = sorted(values)
        self._below: dict[int, int] = {}
        for v in set(values):
            self._below[v] = sum(1 << i for i, w in enumerate(values) if w < v)

    def evaluate(self, G):
        if G == 0:
            if self.empty == "all":
                return full_mask(self.n)
            return self.evaluate(1 << self.empty)
        return self._below[min(self.values[i] for i in indices(G))]

    def count_violators_sorted(self, members):
        if not members:
            return self.n if self.empty == "all" else self.count_violators_sorted([self.empty])
        return bisect_left(self._sorted, min(self.values[i] for i in members))

    def designated_basis(self, members):
        if not members:
            return ()
        return (min(members, key=lambda i: (self.values[i], i)),)


def repetitions_oracle(values: Sequence[int], *, empty="all") -> RepetitionsOracle:
    return RepetitionsOracle(values, empty=empty)


class AllExtremeOracle(ViolatorOracle):
    """Consistent space of dimension 1 on ``R = {0..2m-1}`` in which every
    element of ``R`` is extreme.

    ``V({i}) = {i+m}``, ``V({i+m}) = {i}``, ``V(R - {x}) = {x}``, and every
    other set has no violators.
    """

    def __init__(self, m: int, n: int | None = None):
        if m < 1:
            raise ValueError("m must be at least 1")
        n = 2 * m if n is None else n
        if n < 2 * m:
            raise ValueError("ground set must contain R")
        super().__init__(n)
        self.m = m
        self.R = full_mask(2 * m)

    def evaluate(self, G):
        two_m = 2 * self.m
        if G and G & (G - 1) == 0:
            i = lowest(G)
            if i < two_m:
                return 1 << ((i + self.m) % two_m)
        missing = self.R & ~G
        if G & ~self.R == 0 and missing and missing & (missing - 1) == 0:
            return missing
        return 0


def all_extreme_oracle(m: int, n: int | None = None) -> AllExtremeOracle:
    return AllExtremeOracle(m, n)


def read_multiset(path) -> list[int]:
    with open(path) as fh:
        return [int(line) for line in (ln.strip() for ln in fh) if line and not line.startswith("#")]


def write_multiset(values: Sequence[int], path) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{v}\n" for v in values)
