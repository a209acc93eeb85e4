"""Expected numbers of violators and extreme constraints of random samples.

Exact values are rational means over all ``C(n, r)`` samples; Monte Carlo
values average over seeded uniform samples.  ``v_r``/``x_r`` are the means of
``|V(R)|``/``|X(R)|``; ``v_{r,k}``/``x_{r,k}`` are the means of the removal
closures ``|V_k(R)|``/``|X_k(R)|``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

from .errors import BudgetExceeded, ModeUnsupported
from .rng import partial_fisher_yates, stream_key, trial_generator
from .spaces import ViolatorOracle, extreme_constraints, violators
from .subsets import ConstraintSet, all_masks, from_indices, full_mask, k_subsets, popcount, r_subsets

DEFAULT_KSUBSET_BUDGET = 10**6
EXACT_V_LIMIT = 20
IDENTITY_LIMIT = 16
REMOVAL_LIMIT = 14


@dataclass
class ExpectationResult:
    quantity: str
    value: Fraction | float
    mode: str
    r: int
    k: int = 0
    trials: int | None = None
    std_error: float | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"quantity": self.quantity, "r": self.r, "k": self.k, "mode": self.mode}
        if self.mode == "exact":
            value = Fraction(self.value)
            out["value_num"], out["value_den"] = value.numerator, value.denominator
        else:
            out["estimate"] = float(self.value)
            out["std_error"] = self.std_error
            out["trials"] = self.trials
            out["seed"] = self.seed
        out.update(self.extra)
        return out

    def within(self, target: float, n_se: float) -> bool:
        """True iff the estimate lies within ``n_se`` standard errors of ``target``."""
        return abs(float(self.value) - float(target)) <= n_se * (self.std_error or 0.0)


@dataclass
class RemovalClosure:
    base: ConstraintSet
    k: int
    v_k: ConstraintSet
    x_k: ConstraintSet


@dataclass
class IdentityReport:
    holds: bool
    rows: list[tuple[int, Fraction, Fraction]]
    first_failure: tuple[int, Fraction, Fraction] | None = None


def _exact_mean(oracle: ViolatorOracle, r: int, stat: Callable[[int], int], limit: int) -> Fraction:
    n = oracle.n
    if n > limit:
        raise ModeUnsupported(f"exact expectation needs n <= {limit}, got n = {n}")
    if not 0 <= r <= n:
        raise ValueError(f"sample size {r} outside [0, {n}]")
    total = sum(stat(R) for R in r_subsets(n, r))
    return Fraction(total, comb(n, r))


def exact_expectation_v(oracle: ViolatorOracle, r: int) -> ExpectationResult:
    value = _exact_mean(oracle, r, lambda R: popcount(violators(oracle, R)), EXACT_V_LIMIT)
    return ExpectationResult("v", value, "exact", r)


def exact_expectation_x(oracle: ViolatorOracle, r: int) -> ExpectationResult:
    value = _exact_mean(oracle, r, lambda R: popcount(extreme_constraints(oracle, R)), EXACT_V_LIMIT)
    return ExpectationResult("x", value, "exact", r)


def _identity(n: int, rs, lhs: Callable[[int], Fraction], rhs_x: Callable[[int], Fraction]) -> IdentityReport:
    rows = []
    for r in rs:
        left = lhs(r)
        right = Fraction(n - r, r + 1) * rhs_x(r + 1)
        rows.append((r, left, right))
        if left != right:
            return IdentityReport(False, rows, (r, left, right))
    return IdentityReport(True, rows)


def check_sampling_identity(oracle: ViolatorOracle) -> IdentityReport:
    """``v_r = (n - r)/(r + 1) * x_{r+1}`` for every ``r`` in ``[0, n-1]``, exactly."""
    n = oracle.n
    if n > IDENTITY_LIMIT:
        raise ModeUnsupported(f"identity check needs n <= {IDENTITY_LIMIT}")
    return _identity(n, range(n),
                     lambda r: exact_expectation_v(oracle, r).value,
                     lambda r: exact_expectation_x(oracle, r).value)


def removal_closure(oracle: ViolatorOracle, R: ConstraintSet, k: int,
                    budget: int = DEFAULT_KSUBSET_BUDGET) -> RemovalClosure:
    size = popcount(R)
    if not 0 <= k <= size:
        raise ValueError(f"cannot remove {k} of {size} elements")
    if comb(size, k) > budget:
        raise BudgetExceeded(f"C({size}, {k}) removals exceed budget {budget}")
    outside = full_mask(oracle.n) & ~R
    v_k = x_k = 0
    for K in k_subsets(R, k):
        rest = R & ~K
        v_k |= violators(oracle, rest) & outside
        x_k |= extreme_constraints(oracle, rest)
    return RemovalClosure(R, k, v_k, x_k)


def _closure_means(oracle, r, k, budget) -> tuple[Fraction, Fraction]:
    n = oracle.n
    if n > REMOVAL_LIMIT:
        raise ModeUnsupported(f"exact removal expectations need n <= {REMOVAL_LIMIT}")
    if k > r:
        return Fraction(0), Fraction(0)
    if comb(r, k) > budget:
        raise BudgetExceeded(f"C({r}, {k}) removals exceed budget {budget}")
    tv = tx = 0
    for R in r_subsets(n, r):
        c = removal_closure(oracle, R, k, budget)
        tv += popcount(c.v_k)
        tx += popcount(c.x_k)
    total = comb(n, r)
    return Fraction(tv, total), Fraction(tx, total)


def exact_expectation_vk(oracle: ViolatorOracle, r: int, k: int,
                         budget: int = DEFAULT_KSUBSET_BUDGET) -> ExpectationResult:
    return ExpectationResult("vk", _closure_means(oracle, r, k, budget)[0], "exact", r, k)


def exact_expectation_xk(oracle: ViolatorOracle, r: int, k: int,
                         budget: int = DEFAULT_KSUBSET_BUDGET) -> ExpectationResult:
    return ExpectationResult("xk", _closure_means(oracle, r, k, budget)[1], "exact", r, k)


def check_removal_identity(oracle: ViolatorOracle, k: int,
                           budget: int = DEFAULT_KSUBSET_BUDGET) -> IdentityReport:
    """``v_{r,k} = (n - r)/(r + 1) * x_{r+1,k}`` for every ``r`` in ``[k, n-1]``."""
    n = oracle.n
    means = {r: _closure_means(oracle, r, k, budget) for r in range(k, n + 1)}
    return _identity(n, range(k, n), lambda r: means[r][0], lambda r: means[r][1])


def delta_k_witness(oracle: ViolatorOracle, k: int,
                    budget: int = DEFAULT_KSUBSET_BUDGET) -> tuple[int, ConstraintSet | None]:
    """``max_R |{X(R - K) : K <= R, |K| = k}|`` and a set ``R`` attaining it."""
    n = oracle.n
    if n > REMOVAL_LIMIT:
        raise ModeUnsupported(f"Delta_k needs n <= {REMOVAL_LIMIT}")
    best, arg = 0, None
    for R in all_masks(n):
        size = popcount(R)
        if size < k:
            continue
        if comb(size, k) > budget:
            raise BudgetExceeded(f"C({size}, {k}) removals exceed budget {budget}")
        count = len({extreme_constraints(oracle, R & ~K) for K in k_subsets(R, k)})
        if count > best:
            best, arg = count, R
    return best, arg


def delta_k(oracle: ViolatorOracle, k: int, budget: int = DEFAULT_KSUBSET_BUDGET) -> int:
    return delta_k_witness(oracle, k, budget)[0]


# -- Monte Carlo --------------------------------------------------------------

def default_workers() -> int:
    env = os.environ.get("VLAB_THREADS")
    cap = int(env) if env else 1
    return max(1, min(cap, os.cpu_count() or 1))


def run_trials(stat: Callable[[int], float], trials: int, workers: int | None = None) -> list[float]:
    """Evaluate ``stat(t)`` for ``t < trials``; output order never depends on scheduling."""
    if trials < 1:
        raise ValueError("need at least one trial")
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [stat(t) for t in range(trials)]
    chunk = -(-trials // workers)
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda b: [stat(t) for t in range(*b)], bounds)
    return [v for part in parts for v in part]


def sample_stream(seed: int, n: int, r: int) -> Callable[[int], list[int]]:
    """Trial ``t`` -> sorted uniform ``r``-subset, from the ``"sampling"`` stream."""
    key = stream_key(seed, "sampling")
    return lambda t: partial_fisher_yates(trial_generator(key, t), n, r)


def summarize(values: Sequence[float]) -> tuple[float, float | None]:
    m = len(values)
    mean = math.fsum(values) / m
    if m < 2:
        return mean, None
    var = math.fsum((v - mean) ** 2 for v in values) / (m - 1)
    return mean, math.sqrt(var / m)


def monte_carlo_expectation(oracle: ViolatorOracle, quantity: str, r: int, k: int = 0, *,
                            trials: int, seed: int, workers: int | None = None,
                            budget: int = DEFAULT_KSUBSET_BUDGET) -> ExpectationResult:
    n = oracle.n
    draw = sample_stream(seed, n, r)
    if quantity == "v":
        def stat(t):
            return oracle.count_violators_sorted(draw(t))
    elif quantity == "x":
        def stat(t):
            return popcount(extreme_constraints(oracle, from_indices(draw(t))))
    elif quantity in ("vk", "xk"):
        attr = "v_k" if quantity == "vk" else "x_k"

        def stat(t):
            return popcount(getattr(removal_closure(oracle, from_indices(draw(t)), k, budget), attr))
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    values = run_trials(stat, trials, workers)
    mean, se = summarize(values)
    return ExpectationResult(quantity, mean, "monte_carlo", r, k if quantity in ("vk", "xk") else 0,
                             trials=trials, std_error=se, seed=seed)
