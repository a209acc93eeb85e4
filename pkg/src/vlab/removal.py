"""Removal rules and violators after removal.

A rule maps a sample ``R`` and a budget ``k`` to a set ``K <= R`` of exactly
``k`` elements; the quantity of interest is ``|V(R - K)|`` averaged over
uniform samples ``R`` of size ``r``.  Upper-bound envelopes are computed from
``(n, r, k, delta)`` alone so measured values can be checked against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

from .errors import BudgetExceeded, ModeUnsupported, RuleInapplicable
from .instances.random_space import RandomConsistentOracle, RandomConsistentSpaceParams
from .rng import generator
from .sampling import (
    DEFAULT_KSUBSET_BUDGET,
    REMOVAL_LIMIT,
    ExpectationResult,
    exact_expectation_vk,
    run_trials,
    sample_stream,
    summarize,
)
from .spaces import ViolatorOracle, bases_of, dimension_of, is_nondegenerate
from .subsets import MAX_EXACT_PAIRS, ConstraintSet, from_indices, indices, popcount, r_subsets

RULES = ("random", "smallest", "adversarial", "objective-min", "basis-avoiding")
ENVELOPE_C = 33


@dataclass(frozen=True)
class RemovalRule:
    kind: str
    seed: int = 0
    budget: int = DEFAULT_KSUBSET_BUDGET

    def __post_init__(self):
        if self.kind not in RULES:
            raise ValueError(f"unknown rule {self.kind!r}; choose from {', '.join(RULES)}")

    def select(self, oracle: ViolatorOracle, members: Sequence[int], k: int) -> tuple[int, ...]:
        """The removed set ``K`` for the sorted sample ``members``."""
        if not 0 <= k <= len(members):
            raise ValueError(f"cannot remove {k} of {len(members)} elements")
        if k == 0:
            return ()
        kind = self.kind
        if kind == "smallest":
            return tuple(members[:k])
        if kind == "random":
            rng = generator(self.seed, "rules", k, *members)
            return tuple(sorted(rng.choice(list(members), size=k, replace=False).tolist()))
        if kind == "basis-avoiding":
            basis = set(designated_basis(oracle, members))
            outside = [h for h in members if h not in basis]
            if len(outside) < k:
                raise RuleInapplicable(f"only {len(outside)} elements outside the basis, need {k}")
            return tuple(outside[:k])
        if comb(len(members), k) > self.budget:
            raise BudgetExceeded(f"C({len(members)}, {k}) candidate removals exceed budget {self.budget}")
        member_set = set(members)
        if kind == "adversarial":
            best, best_k = -1, None
            for K in combinations(members, k):
                rest = sorted(member_set.difference(K))
                count = oracle.count_violators_sorted(rest)
                if count > best:
                    best, best_k = count, K
            return best_k
        # objective-min
        if oracle.objective is None:
            raise RuleInapplicable("objective-min needs an LP-type objective")
        R = from_indices(members)
        best_val, best_k = None, None
        for K in combinations(members, k):
            value = oracle.objective(R & ~from_indices(K))
            if best_val is None or value < best_val:
                best_val, best_k = value, K
        return best_k


def designated_basis(oracle: ViolatorOracle, members: Sequence[int]) -> tuple[int, ...]:
    basis = oracle.designated_basis(members)
    if basis is not None:
        return tuple(basis)
    return tuple(indices(bases_of(oracle, from_indices(members))[0]))


def apply_rule(rule: RemovalRule, oracle: ViolatorOracle, R: ConstraintSet, k: int) -> ConstraintSet:
    """``R_{P_k} = R - K`` for the rule's choice of ``K``; requires ``k < |R|``."""
    if not k < popcount(R):
        raise ValueError("removal needs k < |R|")
    K = rule.select(oracle, indices(R), k)
    return R & ~from_indices(K)


def _remaining(rule, oracle, members, k):
    removed = set(rule.select(oracle, members, k))
    return [h for h in members if h not in removed]


def removal_counts(oracle: ViolatorOracle, rule: RemovalRule, r: int, k: int, *,
                   trials: int, seed: int, workers: int | None = None) -> list[int]:
    """``|V(R_{P_k})|`` for each Monte Carlo trial."""
    draw = sample_stream(seed, oracle.n, r)
    return run_trials(lambda t: oracle.count_violators_sorted(_remaining(rule, oracle, draw(t), k)),
                      trials, workers)


def expected_violators_after_removal(oracle: ViolatorOracle, rule: RemovalRule, r: int, k: int,
                                     mode: str = "exact", *, trials: int | None = None,
                                     seed: int | None = None, workers: int | None = None) -> ExpectationResult:
    """``E|V(R_{P_k})|`` over uniform ``R`` of size ``r``.

    In exact mode the random rule is integrated over its seed space, i.e.
    every ``k``-subset of ``R`` is removed with equal weight.
    """
    n = oracle.n
    if not 0 <= k < r <= n and not (k == 0 and r == 0):
        raise ValueError(f"need 0 <= k < r <= n, got k={k}, r={r}, n={n}")
    if mode == "exact":
        if n > 20:
            raise ModeUnsupported("exact removal expectation needs n <= 20")
        total = Fraction(0)
        for R in r_subsets(n, r):
            members = indices(R)
            if rule.kind == "random":
                s = sum(oracle.count_violators_sorted([h for h in members if h not in K])
                        for K in combinations(members, k))
                total += Fraction(s, comb(r, k))
            else:
                total += oracle.count_violators_sorted(_remaining(rule, oracle, members, k))
        return ExpectationResult("v_removed", total / comb(n, r), "exact", r, k,
                                 extra={"rule": rule.kind})
    if trials is None or seed is None:
        raise ValueError("Monte Carlo mode needs trials and seed")
    values = removal_counts(oracle, rule, r, k, trials=trials, seed=seed, workers=workers)
    mean, se = summarize(values)
    return ExpectationResult("v_removed", mean, "monte_carlo", r, k, trials=trials, std_error=se,
                             seed=seed, extra={"rule": rule.kind})


# -- envelopes ----------------------------------------------------------------

@dataclass(frozen=True)
class BoundEnvelope:
    n: int
    r: int
    k: int
    delta: int
    c: int = ENVELOPE_C

    @property
    def theorem1(self) -> float:
        """``c * max{(n/r) delta ln n, (n/r) k}``; also the tail threshold ``x``."""
        n, r = self.n, self.r
        return self.c * max(n / r * self.delta * math.log(n), n / r * self.k)

    @property
    def theorem2(self) -> Fraction:
        geo = sum(self.delta**i for i in range(1, self.k + 2))
        return geo * Fraction(self.n - self.r, self.r + 1) + self.k

    @property
    def lemma6(self) -> Fraction:
        return Fraction(self.n - self.r, self.r + 1) * (self.delta + self.k) + self.k

    @property
    def dim1(self) -> Fraction:
        """Explicit-constant envelope for dimension 1: ``(n-r)/(r+1) (k+1) + k``."""
        return Fraction(self.n - self.r, self.r + 1) * (self.k + 1) + self.k

    def to_json(self) -> dict:
        return {"theorem1": self.theorem1, "theorem2": float(self.theorem2),
                "lemma6": float(self.lemma6)}


@dataclass
class UpperBoundReport:
    measured: ExpectationResult
    envelope: BoundEnvelope
    nondegenerate: bool | None
    vk_plus_k: Fraction | None = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def check_upper_bounds(oracle: ViolatorOracle, rule: RemovalRule, r: int, k: int, mode: str = "exact", *,
                       trials: int | None = None, seed: int | None = None, delta: int | None = None,
                       n_se: float = 3.0) -> UpperBoundReport:
    """Measure ``E|V(R_{P_k})|`` and test it against every applicable envelope.

    Monte Carlo estimates pass an inequality if ``estimate - n_se * se`` is
    below the bound.
    """
    n = oracle.n
    delta = dimension_of(oracle) if delta is None else delta
    env = BoundEnvelope(n, r, k, delta)
    measured = expected_violators_after_removal(oracle, rule, r, k, mode, trials=trials, seed=seed)
    slack = n_se * (measured.std_error or 0.0) if mode != "exact" else 0

    def below(bound) -> bool:
        # exact values stay rational: no float slack may touch them
        return (measured.value - slack if slack else measured.value) <= bound

    nondeg = is_nondegenerate(oracle)[0] if n <= MAX_EXACT_PAIRS else None
    report = UpperBoundReport(measured, env, nondeg)
    report.checks["theorem1"] = below(env.theorem1)
    if n <= REMOVAL_LIMIT:
        report.vk_plus_k = exact_expectation_vk(oracle, r, k).value + k
        report.checks["chain"] = below(report.vk_plus_k)
    if nondeg:
        report.checks["theorem2"] = below(env.theorem2)
        if report.vk_plus_k is not None:
            report.checks["chain_theorem2"] = report.vk_plus_k <= env.theorem2
    if delta == 1:
        report.checks["dim1"] = below(env.dim1)
    return report


@dataclass
class TailReport:
    threshold: float
    exceed: int
    trials: int
    bound: float
    tolerance: float

    @property
    def frequency(self) -> float:
        return self.exceed / self.trials

    @property
    def passed(self) -> bool:
        return self.frequency <= self.bound + self.tolerance


def tail_check(oracle: ViolatorOracle, rule: RemovalRule, r: int, k: int, *, trials: int, seed: int,
               threshold: float | None = None, delta: int | None = None, workers: int | None = None) -> TailReport:
    """Empirical ``Pr[|V(R_{P_k})| >= x]`` against ``1/n``, with a 3-sigma binomial allowance at ``p = 1/n``."""
    n = oracle.n
    if threshold is None:
        threshold = BoundEnvelope(n, r, k, dimension_of(oracle) if delta is None else delta).theorem1
    counts = removal_counts(oracle, rule, r, k, trials=trials, seed=seed, workers=workers)
    exceed = sum(1 for c in counts if c >= threshold)
    p = 1 / n
    return TailReport(threshold, exceed, trials, p, 3 * math.sqrt(p * (1 - p) / trials))


@dataclass
class LowerBoundReport:
    params: RandomConsistentSpaceParams
    estimate: float
    std_error: float | None
    p_zero: float
    target: float
    trials: int
    seed: int
    removal_estimate: float | None = None

    @property
    def corrected_target(self) -> float:
        return (1 - self.p_zero) * self.target

    @property
    def relative_deviation(self) -> float:
        return self.estimate / self.target - 1

    @property
    def corrected_deviation(self) -> float:
        if self.corrected_target == 0:
            return math.inf if self.estimate else 0.0
        return self.estimate / self.corrected_target - 1

    def to_json(self) -> dict:
        return {"n": self.params.n, "r": self.params.r, "k": self.params.k, "delta": self.params.delta,
                "eps": self.params.eps, "estimate": self.estimate, "std_error": self.std_error,
                "p_zero": self.p_zero, "target": self.target, "corrected_target": self.corrected_target,
                "relative_deviation": self.relative_deviation,
                "corrected_deviation": self.corrected_deviation, "removal_estimate": self.removal_estimate,
                "trials": self.trials, "seed": self.seed}


def lemma5_lower_bound_experiment(params: RandomConsistentSpaceParams, *, trials: int, seed: int,
                                  gamma: float | None = None, with_removal: bool = False,
                                  workers: int | None = None) -> LowerBoundReport:
    """Monte Carlo ``E|V(R)|`` on the random consistent space (the ``k = 0`` case).

    Every nonempty violator set has the same size, so the estimate equals
    ``(1 - Pr[V(R) empty])`` times that size; the report carries the measured
    ``Pr[V(R) empty]``.  With ``with_removal`` the basis-avoiding removal of
    ``params.k`` elements is measured as well.
    """
    params.check_lower_bound_regime(gamma)
    oracle = RandomConsistentOracle(params)
    draw = sample_stream(seed, params.n, params.r)
    values = run_trials(lambda t: oracle.count_violators_sorted(draw(t)), trials, workers)
    mean, se = summarize(values)
    p_zero = sum(1 for v in values if v == 0) / trials
    report = LowerBoundReport(params, mean, se, p_zero, params.target, trials, seed)
    if with_removal and params.k:
        counts = removal_counts(oracle, RemovalRule("basis-avoiding"), params.r, params.k,
                                trials=trials, seed=seed, workers=workers)
        report.removal_estimate = summarize(counts)[0]
    return report
