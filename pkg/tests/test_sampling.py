from fractions import Fraction
from itertools import combinations
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlab.errors import BudgetExceeded, ModeUnsupported
from vlab.instances import (
    PointSet,
    RandomConsistentOracle,
    RandomConsistentSpaceParams,
    all_extreme_oracle,
    d_smallest_oracle,
    repetitions_oracle,
    seb_oracle,
)
from vlab.instances.seb import random_integer_points, search_circle_configuration
from vlab.rng import partial_fisher_yates, trial_generator
from vlab.sampling import (
    check_removal_identity,
    check_sampling_identity,
    delta_k,
    exact_expectation_v,
    exact_expectation_vk,
    exact_expectation_x,
    exact_expectation_xk,
    monte_carlo_expectation,
    removal_closure,
    run_trials,
)
from vlab.spaces import combinatorial_dimension, extreme_constraints, is_nondegenerate, violators
from vlab.subsets import all_masks, from_indices, indices, popcount, r_subsets


def from_vals(values):
    return from_indices(v - 1 for v in values)


def brute_mean(n, r, stat):
    """Independent oracle: plain itertools enumeration, no shared subset helpers."""
    total = sum(stat(from_indices(c)) for c in combinations(range(n), r))
    return Fraction(total, comb(n, r))


# -- exact expectations ------------------------------------------------------------

def test_v_one_smallest_example():
    res = exact_expectation_v(d_smallest_oracle(4, 1), 2)
    assert res.value == Fraction(2, 3) and res.mode == "exact"


def test_v_at_full_sample_is_zero():
    assert exact_expectation_v(repetitions_oracle([2, 1, 3]), 3).value == 0


@pytest.mark.parametrize("n,d", [(n, d) for n in (6, 9, 12) for d in (1, 2, 3)])
def test_v_d_smallest_closed_form(n, d):
    for r in range(d, n + 1):
        assert exact_expectation_v(d_smallest_oracle(n, d), r).value == Fraction(n - r, r + 1) * d


def test_v_matches_brute_force(rng):
    o = seb_oracle(random_integer_points(7, 2, rng))
    for r in range(8):
        assert exact_expectation_v(o, r).value == brute_mean(7, r, lambda R: popcount(o.evaluate(R)))


def test_x_examples():
    o = d_smallest_oracle(7, 1)
    assert all(exact_expectation_x(o, r).value == 1 for r in range(1, 8))
    assert exact_expectation_x(o, 0).value == 0
    assert exact_expectation_x(all_extreme_oracle(2), 4).value == 4


def test_exact_limit():
    with pytest.raises(ModeUnsupported):
        exact_expectation_v(d_smallest_oracle(21, 1), 3)


def test_expectation_json_exact():
    doc = exact_expectation_v(d_smallest_oracle(4, 1), 2).to_json()
    assert (doc["value_num"], doc["value_den"]) == (2, 3)


# -- identities ------------------------------------------------------------------

def test_sampling_identity_d_smallest():
    rep = check_sampling_identity(d_smallest_oracle(10, 2))
    assert rep.holds and len(rep.rows) == 10


def test_sampling_identity_random_space():
    o = RandomConsistentOracle(RandomConsistentSpaceParams(12, 6, 0, 1, 0.3, 2))
    assert check_sampling_identity(o).holds


def test_sampling_identity_seb(rng):
    assert check_sampling_identity(seb_oracle(random_integer_points(8, 2, rng))).holds


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.data())
def test_identities_hold_for_any_consistent_table(n, data):
    # both identities are double counting: no axiom beyond consistency is used
    from vlab.spaces import ExplicitOracle
    full = (1 << n) - 1
    table = {G: data.draw(st.integers(0, full)) & ~G for G in all_masks(n)}
    o = ExplicitOracle(n, table)
    assert check_sampling_identity(o).holds
    assert check_removal_identity(o, data.draw(st.integers(0, n))).holds


def test_removal_closure_examples():
    o = d_smallest_oracle(6, 1)
    R = from_vals({3, 4, 5})
    c = removal_closure(o, R, 1)
    assert c.v_k == from_vals({1, 2}) and c.x_k == from_vals({3, 4})
    c0 = removal_closure(o, R, 0)
    assert c0.v_k == violators(o, R) and c0.x_k == extreme_constraints(o, R)
    full = removal_closure(o, R, 3)
    assert full.x_k == 0 and full.v_k == violators(o, 0) & ~R


def test_removal_closure_budget():
    with pytest.raises(BudgetExceeded):
        removal_closure(d_smallest_oracle(14, 1), (1 << 14) - 1, 7, budget=100)


def test_vk_reduces_to_v_at_k0():
    o = d_smallest_oracle(8, 2)
    for r in range(9):
        assert exact_expectation_vk(o, r, 0).value == exact_expectation_v(o, r).value
        assert exact_expectation_xk(o, r, 0).value == exact_expectation_x(o, r).value


def test_vk_identity_one_smallest_n6():
    o = d_smallest_oracle(6, 1)
    v = brute_mean(6, 3, lambda R: popcount(removal_closure(o, R, 1).v_k))
    x = brute_mean(6, 4, lambda R: popcount(removal_closure(o, R, 1).x_k))
    assert exact_expectation_vk(o, 3, 1).value == v
    assert v == Fraction(3, 4) * x


@pytest.mark.parametrize("k", [1, 2])
def test_removal_identity_d_smallest(k):
    assert check_removal_identity(d_smallest_oracle(10, 2), k).holds


def test_removal_identity_random_space():
    o = RandomConsistentOracle(RandomConsistentSpaceParams(12, 6, 1, 1, 0.3, 6))
    assert check_removal_identity(o, 1).holds


def test_removal_identity_k0_matches_sampling_identity():
    o = repetitions_oracle([2, 1, 3, 1, 2])
    assert check_removal_identity(o, 0).rows == check_sampling_identity(o).rows


def test_xk_bounded_for_nondegenerate():
    o = d_smallest_oracle(9, 2)
    for k in (0, 1, 2):
        bound = sum(2**i for i in range(1, k + 2))
        for r in range(k, 10):
            assert exact_expectation_xk(o, r, k).value <= bound


def test_closure_definition_unrolling():
    o = d_smallest_oracle(7, 2)
    for R in all_masks(7):
        for k in range(min(3, popcount(R)) + 1):
            c = removal_closure(o, R, k)
            union = 0
            for j in range(k + 1):
                for K in combinations(indices(R), j):
                    union |= violators(o, R & ~from_indices(K))
            assert c.v_k & ~union == 0


# -- Delta_k -------------------------------------------------------------------------

def test_delta_0_is_one():
    for o in (d_smallest_oracle(6, 2), repetitions_oracle([1, 2, 2, 3])):
        assert delta_k(o, 0) == 1


@pytest.mark.parametrize("d", [1, 2, 3])
def test_delta_1_nondegenerate(d):
    assert delta_k(d_smallest_oracle(8, d), 1) <= d + 1


def test_delta_k_bound_nondegenerate():
    for d in (1, 2):
        o = d_smallest_oracle(9, d)
        for k in range(4):
            assert delta_k(o, k) <= sum(d**i for i in range(k + 1))


def test_delta_1_seb_circle_configuration():
    found = search_circle_configuration()
    assert found is not None
    points, dk, dim = found
    o = seb_oracle(points)
    assert delta_k(o, 1) == 5 > combinatorial_dimension(o) + 1 == 4
    assert not is_nondegenerate(o)[0]


# -- Monte Carlo --------------------------------------------------------------------

def test_fisher_yates_uniform_subset():
    rng = trial_generator(123, 0)
    s = partial_fisher_yates(rng, 50, 10)
    assert len(set(s)) == 10 and s == sorted(s) and all(0 <= h < 50 for h in s)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.data())
def test_fisher_yates_size(n, data):
    r = data.draw(st.integers(0, n))
    s = partial_fisher_yates(trial_generator(7, data.draw(st.integers(0, 1000))), n, r)
    assert len(set(s)) == r


def test_mc_single_trial_equals_evaluation():
    from vlab.sampling import sample_stream
    o = d_smallest_oracle(30, 2)
    res = monte_carlo_expectation(o, "v", 5, trials=1, seed=4)
    sample = sample_stream(4, 30, 5)(0)
    assert res.value == popcount(violators(o, from_indices(sample))) and res.std_error is None


def test_mc_one_smallest_large():
    n, r = 10**4, 100
    res = monte_carlo_expectation(d_smallest_oracle(n, 1), "v", r, trials=10**5, seed=1)
    assert res.within((n - r) / (r + 1), 3.0)


@pytest.mark.parametrize("quantity", ["v", "x", "vk", "xk"])
def test_mc_agrees_with_exact(quantity):
    o = repetitions_oracle([3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8])
    r, k = 5, 1
    exact = {"v": exact_expectation_v(o, r), "x": exact_expectation_x(o, r),
             "vk": exact_expectation_vk(o, r, k), "xk": exact_expectation_xk(o, r, k)}[quantity]
    mc = monte_carlo_expectation(o, quantity, r, k, trials=4000, seed=3)
    assert mc.within(exact.value, 4.0)


def test_mc_deterministic_and_thread_independent():
    o = d_smallest_oracle(500, 2)
    a = monte_carlo_expectation(o, "v", 20, trials=3000, seed=9, workers=1)
    b = monte_carlo_expectation(o, "v", 20, trials=3000, seed=9, workers=4)
    assert a.value == b.value and a.std_error == b.std_error


def test_mc_std_error_halves_with_four_times_trials():
    o = d_smallest_oracle(2000, 1)
    small = monte_carlo_expectation(o, "v", 30, trials=4000, seed=2)
    big = monte_carlo_expectation(o, "v", 30, trials=16000, seed=2)
    assert 0.4 <= big.std_error / small.std_error <= 0.6


def test_run_trials_order():
    assert run_trials(lambda t: t * t, 10, workers=3) == [t * t for t in range(10)]


def test_exact_subsets_count():
    assert sum(1 for _ in r_subsets(10, 4)) == 210


def test_seb_exact_mean_uses_rationals():
    o = seb_oracle(PointSet(2, [(0, 0), (1, 0), (0, 1), (1, 1), (3, 0)]))
    assert isinstance(exact_expectation_v(o, 2).value, Fraction)
