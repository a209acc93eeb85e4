"""LP-type problems ``(H, Omega, omega)`` and the violator space they induce."""

from __future__ import annotations

from typing import Callable

from ..spaces import EXHAUSTIVE, FunctionOracle, SpaceDiagnostics, _mode_fields, _random_subset, _random_submask, _require_exact
from ..rng import generator
from ..subsets import MAX_EXACT_PAIRS, ConstraintSet, all_masks, full_mask, indices, submasks

NEG_INF = float("-inf")


class LPTypeAdapter:
    """Wraps an objective ``omega``; ``omega(0)`` must be the minimum ``-inf``.

    The derived oracle is ``V(R) = {x not in R : omega(R + x) != omega(R)}``.
    """

    def __init__(self, n: int, objective: Callable[[ConstraintSet], object], labels=None):
        self.n = n
        self._objective = objective
        self._cache: dict[int, object] = {}
        self.derived_oracle = FunctionOracle(n, self._derived, labels)
        self.derived_oracle.objective = self.objective

    def objective(self, G: ConstraintSet):
        value = self._cache.get(G)
        if value is None:
            value = NEG_INF if G == 0 else self._objective(G)
            if self.n <= 20:
                self._cache[G] = value
        return value

    def _derived(self, R):
        base = self.objective(R)
        V = 0
        for x in indices(full_mask(self.n) & ~R):
            if self.objective(R | (1 << x)) != base:
                V |= 1 << x
        return V


def seb_adapter(points) -> LPTypeAdapter:
    from .seb import SEBOracle

    seb = SEBOracle(points)
    return LPTypeAdapter(len(points), seb.sq_radius)


def d_smallest_adapter(n: int, d: int) -> LPTypeAdapter:
    def omega(G):
        members = indices(G)
        return NEG_INF if len(members) < d else -(members[d - 1] + 1)

    return LPTypeAdapter(n, omega, [str(i + 1) for i in range(n)])


def check_lp_type_axioms(adapter: LPTypeAdapter, mode=EXHAUSTIVE) -> SpaceDiagnostics:
    """Monotonicity ``omega(F) <= omega(G)`` and locality for all ``F <= G``, ``h``.

    Locality: if ``omega(F) = omega(G) > -inf`` and ``omega(G + h) > omega(G)``
    then ``omega(F + h) > omega(F)``.
    """
    n, w = adapter.n, adapter.objective
    if mode == EXHAUSTIVE:
        _require_exact(n, MAX_EXACT_PAIRS, "LP-type axiom check")
        pairs = ((F, G) for G in all_masks(n) for F in submasks(G))
    else:
        rng = generator(mode.seed, "lp-axioms")

        def sample():
            for _ in range(mode.trials):
                G = _random_subset(rng, n)
                yield _random_submask(rng, G), G

        pairs = sample()
    diag = SpaceDiagnostics(lp_monotone_ok=True, lp_locality_ok=True, **_mode_fields(mode))
    for F, G in pairs:
        wF, wG = w(F), w(G)
        if diag.lp_monotone_ok and wF > wG:
            diag.lp_monotone_ok, diag.lp_monotone_witness = False, (F, G)
        if diag.lp_locality_ok and wF == wG and wF > NEG_INF:
            for h in range(n):
                bit = 1 << h
                if w(G | bit) > wG and not w(F | bit) > wF:
                    diag.lp_locality_ok, diag.lp_locality_witness = False, (F, G, bit)
                    break
        if not diag.lp_monotone_ok and not diag.lp_locality_ok:
            break
    return diag
