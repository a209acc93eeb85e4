"""Canonical form of dimension-1 violator spaces.

Every such space is a smallest-number-with-repetitions instance in disguise:
peeling off, layer by layer, the elements whose singleton violator sets are
inclusion-minimal yields a labelling ``f`` with ``V(R) = {x : f(x) < min f(R)}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import NotDimensionOne, StructureViolation
from .spaces import ViolatorOracle, check_consistency, check_locality, combinatorial_dimension, violators
from .subsets import MAX_EXACT_PAIRS, all_masks, full_mask, indices, is_subset


@dataclass
class Dim1Canonicalization:
    layers: list[int]  # bit masks V_1, ..., V_m
    label: dict[int, int]  # constraint index -> 1-based layer index

    def to_json(self) -> dict:
        return {"layers": [indices(L) for L in self.layers],
                "f": {str(i): self.label[i] for i in sorted(self.label)}}

    def reconstructed(self, R: int, n: int) -> int:
        """``{x : f(x) < min_{i in R} f(i)}`` for nonempty ``R``."""
        level = min(self.label[i] for i in indices(R))
        out = 0
        for L in self.layers[: level - 1]:
            out |= L
        return out


@dataclass
class ReconstructionReport:
    ok: bool
    empty_convention: str | None  # "all", "singleton:<i>", or None if neither holds
    witness: int | None = None


def _require_dim1(oracle: ViolatorOracle) -> None:
    diag = check_consistency(oracle)
    if not diag.consistency_ok:
        raise NotDimensionOne(f"not consistent: witness {indices(diag.consistency_witness)}")
    loc = check_locality(oracle)
    if not loc.locality_ok:
        F, G = loc.locality_witness
        raise NotDimensionOne(f"not a violator space: locality fails for F={indices(F)}, G={indices(G)}")
    dim = combinatorial_dimension(oracle)
    if dim != 1:
        raise NotDimensionOne(f"combinatorial dimension is {dim}, not 1")


def canonicalize_dim1(oracle: ViolatorOracle, *, check: bool = True) -> Dim1Canonicalization:
    if check:
        _require_dim1(oracle)
    n = oracle.n
    single = [violators(oracle, 1 << i) for i in range(n)]
    remaining = set(range(n))
    below = 0
    layers: list[int] = []
    label: dict[int, int] = {}
    while remaining:
        layer = [x for x in remaining
                 if not any(single[y] != single[x] and is_subset(single[y], single[x]) for y in remaining)]
        for x in layer:
            if single[x] != below:
                raise StructureViolation(
                    f"V({{{x}}}) = {indices(single[x])} differs from the union of earlier layers "
                    f"{indices(below)}", witness=1 << x)
        mask = sum(1 << x for x in layer)
        layers.append(mask)
        for x in layer:
            label[x] = len(layers)
        below |= mask
        remaining.difference_update(layer)
    return Dim1Canonicalization(layers, label)


def verify_reconstruction(oracle: ViolatorOracle, canon: Dim1Canonicalization) -> ReconstructionReport:
    """Check ``V(R)`` against the label formula for every nonempty ``R``, and
    that ``V(empty)`` is either everything or the violator set of a singleton."""
    n = oracle.n
    if n > MAX_EXACT_PAIRS:
        raise ValueError(f"reconstruction check needs n <= {MAX_EXACT_PAIRS}")
    for R in all_masks(n):
        if R and violators(oracle, R) != canon.reconstructed(R, n):
            return ReconstructionReport(False, None, R)
    V0 = violators(oracle, 0)
    if V0 == full_mask(n):
        return ReconstructionReport(True, "all")
    for i in range(n):
        if violators(oracle, 1 << i) == V0:
            return ReconstructionReport(True, f"singleton:{i}")
    return ReconstructionReport(False, None, 0)


@dataclass
class PairwiseReport:
    ok: bool
    comparable_witness: tuple[int, int] | None = None  # V(i) != V(j) yet neither violates the other
    chain_witness: tuple[int, int] | None = None  # V(i), V(j) incomparable


def check_pairwise_structure(oracle: ViolatorOracle) -> PairwiseReport:
    """For all ``i != j``: ``V(i) != V(j)`` implies ``i in V(j)`` or ``j in V(i)``,
    and ``V(i)``, ``V(j)`` are nested."""
    if combinatorial_dimension(oracle) != 1:
        raise NotDimensionOne("pairwise structure is only defined for dimension 1")
    n = oracle.n
    single = [violators(oracle, 1 << i) for i in range(n)]
    report = PairwiseReport(True)
    for i, j in combinations(range(n), 2):
        Vi, Vj = single[i], single[j]
        if report.comparable_witness is None and Vi != Vj and not (Vj >> i & 1 or Vi >> j & 1):
            report.ok, report.comparable_witness = False, (i, j)
        if report.chain_witness is None and not (is_subset(Vi, Vj) or is_subset(Vj, Vi)):
            report.ok, report.chain_witness = False, (i, j)
    return report


def relabeled(values, rng) -> tuple[list[int], list[int]]:
    """Shuffle a multiset's occurrences; returns ``(new_values, perm)`` with ``new[perm[i]] = values[i]``."""
    perm = rng.permutation(len(values)).tolist()
    new = [0] * len(values)
    for i, p in enumerate(perm):
        new[p] = values[i]
    return new, perm


def enumerate_dimension_one_spaces(n: int):
    """Every violator space on ``n`` elements whose combinatorial dimension is 1.

    Backtracks over ``V(G)`` by increasing ``|G|``.  A space of dimension at
    most 1 gives each ``G`` a basis of size at most 1, so ``V(G)`` is
    ``V(empty)`` or some ``V(g)`` with ``g in G``; locality against every
    assigned subset prunes the rest.  Survivors are filtered on the exact
    dimension.  Yields :class:`~vlab.spaces.ExplicitOracle` instances.
    """
    from .spaces import ExplicitOracle
    from .subsets import submasks

    if n > 4:
        raise ValueError("the exhaustive sweep is limited to n <= 4")
    order = sorted(all_masks(n), key=lambda G: (G.bit_count(), G))
    table: dict[int, int] = {}

    def allowed(G: int, V: int) -> bool:
        if G & V:
            return False
        for F in submasks(G):
            if F != G and not (G & table[F]) and table[F] != V:
                return False
        return True

    def candidates(G: int) -> list[int]:
        if G == 0:
            return list(all_masks(n))
        if G.bit_count() == 1:
            return [V for V in all_masks(n) if not V & G]
        return sorted({table[0]} | {table[1 << g] for g in indices(G)})

    def walk(pos: int):
        if pos == len(order):
            space = ExplicitOracle(n, dict(table), validate=False)
            if combinatorial_dimension(space) == 1:
                yield space
            return
        G = order[pos]
        for V in candidates(G):
            if allowed(G, V):
                table[G] = V
                yield from walk(pos + 1)
                del table[G]

    if n:
        yield from walk(0)
