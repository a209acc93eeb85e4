"""Violator oracles and exact structural checks.

An oracle maps a constraint set ``G`` to its violator set ``V(G)``.  The
checks below decide the axioms (consistency, locality), enumerate bases, and
compute the combinatorial dimension, extreme constraints and nondegeneracy by
brute force over bit masks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import ConsistencyViolation, ModeUnsupported
from .rng import generator
from .subsets import (
    MAX_EXACT_PAIRS,
    MAX_EXACT_SUBSETS,
    ConstraintSet,
    GroundSet,
    all_masks,
    from_indices,
    full_mask,
    indices,
    is_subset,
    lex_key,
    popcount,
    proper_submasks,
    submasks,
)


class ViolatorOracle:
    """Deterministic map ``G -> V(G)`` over the ground set ``{0..n-1}``.

    Subclasses implement :meth:`evaluate`.  Callers go through
    :func:`violators` (or call the oracle), which memoizes for small ground
    sets and rejects inconsistent answers.
    """

    def __init__(self, n: int, labels: Sequence[str] | None = None, *, memoize: bool | None = None):
        self.ground = GroundSet(n, tuple(labels) if labels is not None else None)
        if memoize is None:
            memoize = n <= MAX_EXACT_SUBSETS
        self._memo: dict[int, int] | None = {} if memoize else None
        # set by check_consistency / violators when a failure is observed
        self.consistency_failure: int | None = None
        # dimension known by construction, for ground sets too large to enumerate
        self.known_dimension: int | None = None
        # optional LP-type objective, used by the objective-min removal rule
        self.objective: Callable[[ConstraintSet], object] | None = None

    @property
    def n(self) -> int:
        return self.ground.n

    def evaluate(self, G: ConstraintSet) -> ConstraintSet:
        raise NotImplementedError

    def __call__(self, G: ConstraintSet) -> ConstraintSet:
        return violators(self, G)

    def count_violators_sorted(self, members: Sequence[int]) -> int:
        """``|V(G)|`` for ``G`` given as a sorted index list.

        Families with a closed form override this so Monte Carlo runs on
        large ground sets never materialise bit masks.
        """
        return popcount(violators(self, from_indices(members)))

    def designated_basis(self, members: Sequence[int]) -> tuple[int, ...] | None:
        """A basis of ``G`` known by construction, or ``None`` if not available."""
        return None

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class FunctionOracle(ViolatorOracle):
    def __init__(self, n: int, fn: Callable[[ConstraintSet], ConstraintSet], labels=None, **kw):
        super().__init__(n, labels, **kw)
        self._fn = fn

    def evaluate(self, G):
        return self._fn(G)


class ExplicitOracle(ViolatorOracle):
    """Table-backed space; unlisted sets get ``V = 0`` (the empty set)."""

    def __init__(self, n: int, table: dict[int, int], labels=None, *, validate: bool = True):
        super().__init__(n, labels)
        full = full_mask(n)
        for G, V in table.items():
            if not is_subset(G, full) or not is_subset(V, full):
                raise ValueError(f"entry {indices(G)} -> {indices(V)} leaves the ground set")
            if validate and G & V:
                raise ConsistencyViolation(
                    f"V({indices(G)}) meets its argument", witness=G)
        self.table = {G: V for G, V in table.items() if V}

    def evaluate(self, G):
        return self.table.get(G, 0)

    @classmethod
    def tabulate(cls, oracle: ViolatorOracle) -> "ExplicitOracle":
        _require_exact(oracle.n, MAX_EXACT_SUBSETS, "tabulation")
        table = {G: oracle.evaluate(G) for G in all_masks(oracle.n)}
        return cls(oracle.n, table, oracle.ground.labels, validate=False)

    def to_json(self) -> dict:
        entries = [
            {"set": indices(G), "violators": indices(V)}
            for G, V in sorted(self.table.items(), key=lambda kv: (popcount(kv[0]), lex_key(kv[0])))
        ]
        return {"n": self.n, "entries": entries, "default": "empty"}

    @classmethod
    def from_json(cls, data: dict) -> "ExplicitOracle":
        if data.get("default", "empty") != "empty":
            raise ValueError("only the 'empty' default is supported")
        n = int(data["n"])
        table: dict[int, int] = {}
        for entry in data.get("entries", []):
            G = from_indices(entry["set"])
            if G in table:
                raise ValueError(f"duplicate entry for set {entry['set']}")
            table[G] = from_indices(entry["violators"])
        return cls(n, table, data.get("labels"))


def load_explicit(path) -> ExplicitOracle:
    with open(path) as fh:
        return ExplicitOracle.from_json(json.load(fh))


def save_explicit(oracle: ViolatorOracle, path) -> None:
    space = oracle if isinstance(oracle, ExplicitOracle) else ExplicitOracle.tabulate(oracle)
    with open(path, "w") as fh:
        json.dump(space.to_json(), fh, indent=1)
        fh.write("\n")


def violators(oracle: ViolatorOracle, G: ConstraintSet) -> ConstraintSet:
    memo = oracle._memo
    if memo is not None:
        V = memo.get(G)
        if V is not None:
            return V
    if G < 0 or G >> oracle.n:
        raise ValueError(f"{indices(G)} is not a subset of the ground set")
    V = oracle.evaluate(G)
    if V & G:
        oracle.consistency_failure = G
        raise ConsistencyViolation(f"V({indices(G)}) = {indices(V)} meets its argument", witness=G)
    if memo is not None:
        memo[G] = V
    return V


# -- diagnostics --------------------------------------------------------------

EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class Sampled:
    trials: int
    seed: int


@dataclass
class SpaceDiagnostics:
    consistency_ok: bool | None = None
    consistency_witness: int | None = None
    locality_ok: bool | None = None
    locality_witness: tuple[int, int] | None = None
    dimension: int | None = None
    nondegenerate: bool | None = None
    nondegeneracy_witness: int | None = None
    lp_monotone_ok: bool | None = None
    lp_monotone_witness: tuple[int, int] | None = None
    lp_locality_ok: bool | None = None
    lp_locality_witness: tuple[int, int, int] | None = None
    mode: str = EXHAUSTIVE
    trials: int | None = None
    seed: int | None = None

    def merge(self, other: "SpaceDiagnostics") -> "SpaceDiagnostics":
        for name in self.__dataclass_fields__:
            value = getattr(other, name)
            if value is not None and name not in ("mode", "trials", "seed"):
                setattr(self, name, value)
        if other.mode != EXHAUSTIVE:
            self.mode, self.trials, self.seed = other.mode, other.trials, other.seed
        return self

    @property
    def all_ok(self) -> bool:
        # nondegeneracy is a property, not an axiom; it never fails a check
        flags = [self.consistency_ok, self.locality_ok, self.lp_monotone_ok, self.lp_locality_ok]
        return all(f is not False for f in flags)

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, tuple):
                return [indices(m) for m in x]
            return indices(x)

        out: dict = {"mode": self.mode}
        if self.mode != EXHAUSTIVE:
            out["trials"], out["seed"] = self.trials, self.seed
        for name in ("consistency", "locality", "lp_monotone", "lp_locality"):
            ok = getattr(self, f"{name}_ok")
            if ok is not None:
                out[f"{name}_ok"] = ok
                witness = getattr(self, f"{name}_witness")
                if witness is not None:
                    out[f"{name}_witness"] = enc(witness)
        if self.dimension is not None:
            out["dimension"] = self.dimension
        if self.nondegenerate is not None:
            out["nondegenerate"] = self.nondegenerate
            if self.nondegeneracy_witness is not None:
                out["nondegeneracy_witness"] = enc(self.nondegeneracy_witness)
        return out


def _require_exact(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise ModeUnsupported(f"exhaustive {what} needs n <= {limit}, got n = {n}")


def _random_subset(rng, n: int) -> int:
    return int.from_bytes(rng.bytes((n + 7) // 8), "little") & full_mask(n)


def _random_submask(rng, mask: int) -> int:
    return _random_subset(rng, mask.bit_length()) & mask


def _mode_fields(mode) -> dict:
    if mode == EXHAUSTIVE:
        return {"mode": EXHAUSTIVE}
    return {"mode": "sampled", "trials": mode.trials, "seed": mode.seed}


def check_consistency(oracle: ViolatorOracle, mode=EXHAUSTIVE) -> SpaceDiagnostics:
    if mode == EXHAUSTIVE:
        _require_exact(oracle.n, MAX_EXACT_SUBSETS, "consistency check")
        candidates: Iterable[int] = all_masks(oracle.n)
    else:
        rng = generator(mode.seed, "consistency")
        candidates = (_random_subset(rng, oracle.n) for _ in range(mode.trials))
    for G in candidates:
        if oracle.evaluate(G) & G:
            oracle.consistency_failure = G
            return SpaceDiagnostics(consistency_ok=False, consistency_witness=G, **_mode_fields(mode))
    return SpaceDiagnostics(consistency_ok=True, **_mode_fields(mode))


def locality_fails(oracle: ViolatorOracle, F: int, G: int) -> bool:
    """True iff ``(F, G)`` is a locality counterexample."""
    VF = violators(oracle, F)
    return is_subset(F, G) and not (G & VF) and violators(oracle, G) != VF


def check_locality(oracle: ViolatorOracle, mode=EXHAUSTIVE, *, pairs: bool = False) -> SpaceDiagnostics:
    """Decide locality.

    Exhaustively, it suffices to test one-element extensions: if
    ``V(F + h) = V(F)`` for every ``h`` outside ``F`` and ``V(F)``, chaining
    the extensions yields ``V(G) = V(F)`` for every admissible ``G``.  With
    ``pairs=True`` all pairs ``F <= G`` are scanned instead (3^n work).
    """
    if mode == EXHAUSTIVE:
        _require_exact(oracle.n, MAX_EXACT_PAIRS, "locality check")
        full = full_mask(oracle.n)
        for F in all_masks(oracle.n):
            VF = violators(oracle, F)
            free = full & ~F & ~VF
            if pairs:
                for extra in submasks(free):
                    if extra and violators(oracle, F | extra) != VF:
                        return SpaceDiagnostics(locality_ok=False, locality_witness=(F, F | extra))
            else:
                for h in indices(free):
                    if violators(oracle, F | (1 << h)) != VF:
                        return SpaceDiagnostics(locality_ok=False, locality_witness=(F, F | (1 << h)))
        return SpaceDiagnostics(locality_ok=True)
    rng = generator(mode.seed, "locality")
    for _ in range(mode.trials):
        G = _random_subset(rng, oracle.n)
        F = _random_submask(rng, G)
        if locality_fails(oracle, F, G):
            return SpaceDiagnostics(locality_ok=False, locality_witness=(F, G), **_mode_fields(mode))
    return SpaceDiagnostics(locality_ok=True, **_mode_fields(mode))


def _refuse_if_inconsistent(oracle: ViolatorOracle) -> None:
    if oracle.consistency_failure is not None:
        raise ConsistencyViolation(
            "oracle failed a consistency check; structural queries refused",
            witness=oracle.consistency_failure)


def bases_of(oracle: ViolatorOracle, G: ConstraintSet) -> list[int]:
    """All inclusion-minimal ``B <= G`` with ``V(B) = V(G)``, sorted lexicographically."""
    _refuse_if_inconsistent(oracle)
    _require_exact(popcount(G), MAX_EXACT_SUBSETS, "basis enumeration")
    target = violators(oracle, G)
    same = sorted((B for B in submasks(G) if violators(oracle, B) == target), key=popcount)
    minimal: list[int] = []
    for B in same:
        if not any(is_subset(M, B) for M in minimal):
            minimal.append(B)
    return sorted(minimal, key=lex_key)


def is_basis_in_space(oracle: ViolatorOracle, B: ConstraintSet) -> bool:
    _require_exact(popcount(B), MAX_EXACT_SUBSETS, "basis test")
    VB = violators(oracle, B)
    # maximal proper subsets first: in violator spaces they decide the question
    for b in indices(B):
        if violators(oracle, B & ~(1 << b)) == VB:
            return False
    return all(violators(oracle, F) != VB for F in proper_submasks(B))


def combinatorial_dimension(oracle: ViolatorOracle) -> int:
    _refuse_if_inconsistent(oracle)
    _require_exact(oracle.n, MAX_EXACT_SUBSETS, "dimension computation")
    by_size: list[list[int]] = [[] for _ in range(oracle.n + 1)]
    for G in all_masks(oracle.n):
        by_size[popcount(G)].append(G)
    for size in range(oracle.n, 0, -1):
        if any(is_basis_in_space(oracle, B) for B in by_size[size]):
            return size
    return 0


def extreme_constraints(oracle: ViolatorOracle, G: ConstraintSet) -> ConstraintSet:
    X = 0
    for r in indices(G):
        bit = 1 << r
        if violators(oracle, G & ~bit) & bit:
            X |= bit
    return X


def has_unique_basis(oracle: ViolatorOracle, G: ConstraintSet) -> bool:
    # the minimal elements are unique iff the intersection of all B <= G with
    # V(B) = V(G) is itself such a set
    target = violators(oracle, G)
    common = G
    for B in submasks(G):
        if violators(oracle, B) == target:
            common &= B
    return violators(oracle, common) == target


def is_nondegenerate(oracle: ViolatorOracle) -> tuple[bool, int | None]:
    _refuse_if_inconsistent(oracle)
    _require_exact(oracle.n, MAX_EXACT_PAIRS, "nondegeneracy check")
    for G in all_masks(oracle.n):
        if not has_unique_basis(oracle, G):
            return False, G
    return True, None


def diagnose(oracle: ViolatorOracle, *, seed: int = 0, trials: int = 10_000) -> SpaceDiagnostics:
    """Run every structural check in the strongest mode ``n`` permits."""
    n = oracle.n
    sampled = Sampled(trials, seed)
    diag = check_consistency(oracle, EXHAUSTIVE if n <= MAX_EXACT_SUBSETS else sampled)
    if not diag.consistency_ok:
        return diag
    diag.merge(check_locality(oracle, EXHAUSTIVE if n <= MAX_EXACT_PAIRS else sampled))
    if n <= MAX_EXACT_SUBSETS:
        diag.dimension = combinatorial_dimension(oracle)
    elif oracle.known_dimension is not None:
        diag.dimension = oracle.known_dimension
    if n <= MAX_EXACT_PAIRS:
        ok, witness = is_nondegenerate(oracle)
        diag.nondegenerate, diag.nondegeneracy_witness = ok, witness
    return diag


def dimension_of(oracle: ViolatorOracle) -> int:
    """Known dimension if the family records one, else the exact computation."""
    if oracle.known_dimension is not None:
        return oracle.known_dimension
    return combinatorial_dimension(oracle)

