"""Random consistent space realising the lower bound of order (n/r) delta log n.

Every set ``B`` with ``0 < |B| <= delta`` gets a pseudorandom violator set of
fixed size ``x`` drawn from ``H - B``.  A set ``R`` of the sample size ``r``
inherits ``V(B)`` from the lexicographically smallest ``B <= R`` whose
violators miss ``R``.  With a removal budget ``k > 0``, a set ``S`` of size
``r - k`` inherits the violators of the lexicographically smallest size-``r``
set that the basis-avoiding rule maps onto ``S``.  All other sets have no
violators.

Violator sets are never stored: they are regenerated from a keyed Philox
stream, so the oracle is a pure function of its parameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from ..errors import BudgetExceeded, RegimeUnsupported
from ..rng import stream_key
from ..spaces import ViolatorOracle
from ..subsets import from_indices, indices, lex_ordered_small_subsets

DEFAULT_CALL_BUDGET = 10**7
DEFAULT_KSUBSET_BUDGET = 10**6


@dataclass(frozen=True)
class RandomConsistentSpaceParams:
    n: int
    r: int
    k: int
    delta: int
    eps: float
    seed: int

    @classmethod
    def from_alpha(cls, n: int, alpha: float, delta: int, eps: float, seed: int, k: int = 0):
        return cls(n=n, r=round(n**alpha), k=k, delta=delta, eps=eps, seed=seed)

    @property
    def alpha(self) -> float:
        return math.log(self.r) / math.log(self.n)

    @property
    def target(self) -> float:
        """``eps * (n/r) * delta * ln n`` before rounding."""
        return self.eps * (self.n / self.r) * self.delta * math.log(self.n)

    @property
    def violator_size(self) -> int:
        return math.ceil(self.target)

    def validate(self) -> None:
        if self.n < 2:
            raise RegimeUnsupported("need n >= 2")
        if not 1 <= self.delta:
            raise RegimeUnsupported("need delta >= 1")
        if not 0 <= self.k < self.r <= self.n:
            raise RegimeUnsupported(f"need 0 <= k < r <= n, got k={self.k}, r={self.r}")
        if self.r - self.k <= self.delta:
            raise RegimeUnsupported("sets of size r - k must be larger than delta")
        if not 0 < self.eps < self.alpha:
            raise RegimeUnsupported(f"need 0 < eps < alpha = {self.alpha:.4f}")
        if self.violator_size > self.n / 4:
            raise RegimeUnsupported(
                f"violator size {self.violator_size} exceeds n/4; the construction needs x = o(n)")

    def check_lower_bound_regime(self, gamma: float | None = None) -> float:
        """Assert ``delta <= n^gamma`` for some ``gamma < alpha - eps``; returns gamma."""
        gamma = math.log(self.delta) / math.log(self.n) if gamma is None else gamma
        if not gamma < self.alpha - self.eps:
            raise RegimeUnsupported(f"need gamma < alpha - eps = {self.alpha - self.eps:.4f}, got {gamma:.4f}")
        if self.delta > self.n**gamma + 1e-9:
            raise RegimeUnsupported("delta exceeds n^gamma")
        return gamma

    def to_json(self) -> dict:
        return {"family": "random-consistent", **asdict(self)}

    @classmethod
    def from_json(cls, data: dict) -> "RandomConsistentSpaceParams":
        return cls(**{f: data[f] for f in ("n", "r", "k", "delta", "eps", "seed")})

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RandomConsistentSpaceParams":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


class RandomConsistentOracle(ViolatorOracle):
    def __init__(self, params: RandomConsistentSpaceParams, *,
                 call_budget: int = DEFAULT_CALL_BUDGET, ksubset_budget: int = DEFAULT_KSUBSET_BUDGET):
        params.validate()
        super().__init__(params.n)
        self.params = params
        self.known_dimension = params.delta
        self.x = params.violator_size
        self.ksubset_budget = ksubset_budget
        scan = sum(comb(params.r, i) for i in range(1, params.delta + 1))
        if scan > call_budget:
            raise RegimeUnsupported(f"basis scan needs {scan} candidates, budget is {call_budget}")
        self.basis_violators = lru_cache(maxsize=1 << 16)(self._basis_violators)

    def _basis_violators(self, B: tuple[int, ...]) -> frozenset[int]:
        p = self.params
        rng = np.random.Generator(np.random.Philox(key=stream_key(p.seed, "basis-violators", *B)))
        excluded = set(B)
        chosen: dict[int, None] = {}
        while len(chosen) < self.x:
            for h in rng.integers(0, p.n, size=2 * self.x).tolist():
                if h not in excluded and h not in chosen:
                    chosen[h] = None
                    if len(chosen) == self.x:
                        break
        return frozenset(chosen)

    def lex_basis(self, members) -> tuple[int, ...] | None:
        """Lexicographically smallest ``B <= R``, ``0 < |B| <= delta``, with ``V(B)`` missing ``R``."""
        member_set = set(members)
        for B in lex_ordered_small_subsets(members, self.params.delta):
            if self.basis_violators(B).isdisjoint(member_set):
                return B
        return None

    def removal_choice(self, members, basis) -> tuple[int, ...]:
        """The ``k`` smallest elements of ``R`` outside ``basis``."""
        keep = set(basis or ())
        return tuple(h for h in members if h not in keep)[: self.params.k]

    def source_of(self, members) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        """Lexicographically smallest size-``r`` set with nonempty violators that
        the basis-avoiding rule maps onto ``members``; returns ``(source, basis)``."""
        p = self.params
        member_set = set(members)
        # removed elements are all smaller than some element of members outside
        # the basis, hence smaller than the (delta+1)-th smallest member
        bound = members[p.delta]
        pool = [h for h in range(bound) if h not in member_set]
        if comb(len(pool), p.k) > self.ksubset_budget:
            raise BudgetExceeded(f"source search over C({len(pool)}, {p.k}) removals exceeds budget")
        if p.k == 1:
            candidates = (tuple(sorted(member_set | {t})) for t in pool)
        else:
            candidates = iter(sorted(tuple(sorted(member_set.union(T))) for T in combinations(pool, p.k)))
        for source in candidates:
            basis = self.lex_basis(source)
            if basis is None:
                continue
            removed = self.removal_choice(source, basis)
            if member_set.isdisjoint(removed):
                return source, basis
        return None

    def violators_sorted(self, members) -> frozenset[int]:
        p = self.params
        size = len(members)
        if size == 0:
            return frozenset()
        if size <= p.delta:
            return self.basis_violators(tuple(members))
        if size == p.r:
            basis = self.lex_basis(members)
            return self.basis_violators(basis) if basis else frozenset()
        if p.k and size == p.r - p.k:
            found = self.source_of(members)
            return self.basis_violators(found[1]) if found else frozenset()
        return frozenset()

    def designated_basis(self, members):
        p = self.params
        size = len(members)
        if 0 < size <= p.delta:
            return tuple(members)
        if size == p.r:
            return self.lex_basis(members) or ()
        if p.k and size == p.r - p.k:
            found = self.source_of(members)
            return found[1] if found else ()
        return ()

    def evaluate(self, G):
        return from_indices(self.violators_sorted(indices(G)))

    def count_violators_sorted(self, members):
        return len(self.violators_sorted(list(members)))


def random_consistent_oracle(params: RandomConsistentSpaceParams, **budgets) -> RandomConsistentOracle:
    return RandomConsistentOracle(params, **budgets)
