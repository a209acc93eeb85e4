import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlab.errors import ConsistencyViolation, ModeUnsupported
from vlab.instances import PointSet, all_extreme_oracle, d_smallest_oracle, repetitions_oracle, seb_oracle
from vlab.instances.random_space import RandomConsistentOracle, RandomConsistentSpaceParams
from vlab.spaces import (
    ExplicitOracle,
    FunctionOracle,
    Sampled,
    bases_of,
    check_consistency,
    check_locality,
    combinatorial_dimension,
    diagnose,
    extreme_constraints,
    is_basis_in_space,
    is_nondegenerate,
    load_explicit,
    locality_fails,
    save_explicit,
    violators,
)
from vlab.subsets import all_masks, from_indices, indices, is_subset, k_subsets, lex_key, popcount, submasks

SQUARE = [(0, 0), (1, 0), (0, 1), (1, 1)]


def vals(mask):
    """Index mask -> set of 1-based values (d-smallest labels value i+1 at index i)."""
    return {i + 1 for i in indices(mask)}


def from_vals(values):
    return from_indices(v - 1 for v in values)


def square_plus():
    return seb_oracle(PointSet(2, SQUARE + [(3, 0)]))


# -- subsets ------------------------------------------------------------------

def test_k_subsets_lexicographic():
    got = [indices(m) for m in k_subsets(from_indices([0, 2, 3, 5]), 2)]
    assert got == [[0, 2], [0, 3], [0, 5], [2, 3], [2, 5], [3, 5]]


@given(st.integers(0, 2**10 - 1))
def test_submasks_enumerates_power_set(mask):
    subs = list(submasks(mask))
    assert len(subs) == 2 ** popcount(mask) == len(set(subs))
    assert all(is_subset(s, mask) for s in subs)


@given(st.lists(st.integers(0, 40), unique=True))
def test_index_round_trip(items):
    assert indices(from_indices(items)) == sorted(items)
    assert lex_key(from_indices(items)) == tuple(sorted(items))


# -- violators ----------------------------------------------------------------

def test_violators_d_smallest_example():
    o = d_smallest_oracle(5, 2)
    assert vals(violators(o, from_vals({2, 4, 5}))) == {1, 3}


@pytest.mark.parametrize("oracle", [d_smallest_oracle(6, 2), repetitions_oracle([1, 1, 2]), square_plus()])
def test_violators_of_ground_set_empty(oracle):
    assert violators(oracle, (1 << oracle.n) - 1) == 0


def test_violators_seb_square_corners():
    assert indices(violators(square_plus(), 0b1111)) == [4]


def test_violators_rejects_inconsistent_answer():
    o = FunctionOracle(3, lambda G: G)
    with pytest.raises(ConsistencyViolation):
        violators(o, 0b010)
    assert o.consistency_failure == 0b010


# -- consistency / locality ----------------------------------------------------

@pytest.mark.parametrize("n", [1, 5, 12])
def test_consistency_d_smallest(n):
    assert check_consistency(d_smallest_oracle(n, min(2, n))).consistency_ok


def test_consistency_failure_witness():
    o = FunctionOracle(3, lambda G: 0b010 if G == 0b010 else 0)
    diag = check_consistency(o)
    assert not diag.consistency_ok
    assert diag.consistency_witness == 0b010
    # the witness re-fails
    assert o.evaluate(diag.consistency_witness) & diag.consistency_witness


def test_explicit_loader_rejects_inconsistent_entry():
    with pytest.raises(ConsistencyViolation):
        ExplicitOracle.from_json({"n": 3, "entries": [{"set": [1], "violators": [1]}], "default": "empty"})


def test_consistency_random_space_n12():
    params = RandomConsistentSpaceParams(n=12, r=6, k=0, delta=1, eps=0.3, seed=5)
    assert check_consistency(RandomConsistentOracle(params)).consistency_ok


def test_consistency_exhaustive_limit():
    with pytest.raises(ModeUnsupported):
        check_consistency(d_smallest_oracle(21, 2))


def test_sampled_mode_records_trials_and_seed():
    diag = check_consistency(d_smallest_oracle(40, 3), Sampled(200, 9))
    assert diag.consistency_ok and diag.mode == "sampled" and (diag.trials, diag.seed) == (200, 9)


def test_locality_seb_random_points(rng):
    from vlab.instances.seb import random_integer_points
    for _ in range(3):
        oracle = seb_oracle(random_integer_points(8, 2, rng))
        assert check_locality(oracle).locality_ok


def test_locality_all_extreme_fails_with_witness():
    o = all_extreme_oracle(2)
    diag = check_locality(o)
    assert not diag.locality_ok
    F, G = diag.locality_witness
    assert locality_fails(o, F, G)


def test_locality_repetitions():
    assert check_locality(repetitions_oracle([1, 1, 2]), pairs=True).locality_ok


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 15), min_size=3, max_size=3), st.integers(1, 4))
def test_one_step_locality_agrees_with_pairs(table_vals, n):
    # small random tables: the one-element-extension criterion decides locality
    table = {G: table_vals[G % 3] & ~G & ((1 << n) - 1) for G in all_masks(n)}
    o = ExplicitOracle(n, table, validate=False)
    assert check_locality(o).locality_ok == check_locality(o, pairs=True).locality_ok


# -- bases, dimension, extreme ---------------------------------------------------

def test_bases_square_diagonals():
    assert [indices(B) for B in bases_of(square_plus(), 0b1111)] == [[0, 3], [1, 2]]


def test_bases_d_smallest_unique():
    o = d_smallest_oracle(8, 3)
    G = from_vals({2, 4, 5, 7, 8})
    assert [vals(B) for B in bases_of(o, G)] == [{2, 4, 5}]


def test_bases_of_empty():
    assert bases_of(d_smallest_oracle(4, 1), 0) == [0]


def test_is_basis_in_space_examples():
    o = d_smallest_oracle(5, 2)
    assert is_basis_in_space(o, 0)
    assert is_basis_in_space(o, from_vals({1, 2}))
    assert not is_basis_in_space(o, from_vals({1, 2, 3}))


def test_dimension_examples(rng):
    assert combinatorial_dimension(d_smallest_oracle(8, 3)) == 3
    assert combinatorial_dimension(repetitions_oracle([2, 1, 1, 3, 2])) == 1
    from vlab.instances.seb import random_integer_points
    assert combinatorial_dimension(seb_oracle(random_integer_points(6, 2, rng))) <= 3


def test_dimension_all_empty_is_zero():
    assert combinatorial_dimension(FunctionOracle(4, lambda G: 0)) == 0


def test_extreme_examples():
    assert extreme_constraints(square_plus(), 0b1111) == 0
    assert vals(extreme_constraints(d_smallest_oracle(5, 2), from_vals({2, 4, 5}))) == {2, 4}
    o = all_extreme_oracle(2)
    assert extreme_constraints(o, 0b1111) == 0b1111


def test_nondegeneracy_examples():
    for n in (4, 8, 12):
        assert is_nondegenerate(d_smallest_oracle(n, 2))[0]
    ok, witness = is_nondegenerate(seb_oracle(PointSet(2, SQUARE)))
    assert not ok and witness == 0b1111
    assert len(bases_of(seb_oracle(PointSet(2, SQUARE)), witness)) >= 2
    assert is_nondegenerate(FunctionOracle(0, lambda G: 0)) == (True, None)


def test_structural_queries_refuse_inconsistent_oracle():
    o = FunctionOracle(3, lambda G: 0b001 if G == 0b001 else 0)
    check_consistency(o)
    with pytest.raises(ConsistencyViolation):
        combinatorial_dimension(o)


def test_diagnose_d_smallest():
    diag = diagnose(d_smallest_oracle(10, 2))
    assert diag.all_ok and diag.dimension == 2 and diag.nondegenerate


# -- invariants -------------------------------------------------------------------

SPACES = [d_smallest_oracle(8, 2), repetitions_oracle([3, 1, 2, 1, 3, 2, 4]), square_plus()]


@pytest.mark.parametrize("oracle", SPACES)
def test_locality_closure(oracle):
    n = oracle.n
    for G in all_masks(n):
        VG = violators(oracle, G)
        for F in submasks(G):
            if violators(oracle, F) != VG:
                continue
            for E in submasks(F):
                if violators(oracle, E) == VG:
                    assert violators(oracle, F) == violators(oracle, E)


@pytest.mark.parametrize("oracle", SPACES)
def test_extreme_is_intersection_of_bases(oracle):
    delta = combinatorial_dimension(oracle)
    for G in all_masks(oracle.n):
        common = G
        for B in bases_of(oracle, G):
            common &= B
        X = extreme_constraints(oracle, G)
        assert X == common
        assert popcount(X) <= delta


def test_nondegenerate_extreme_equals_basis():
    o = d_smallest_oracle(9, 3)
    for R in all_masks(9):
        (B,) = bases_of(o, R)
        X = extreme_constraints(o, R)
        assert X == B
        for x in indices(R & ~X):
            assert extreme_constraints(o, R & ~(1 << x)) == X


def test_consistent_space_escape():
    o = all_extreme_oracle(3)
    R = (1 << 6) - 1
    assert popcount(extreme_constraints(o, R)) == 6 > combinatorial_dimension(o) == 1


def test_determinism_of_evaluation():
    a, b = square_plus(), square_plus()
    assert [a.evaluate(G) for G in all_masks(5)] == [b.evaluate(G) for G in all_masks(5)]


def test_explicit_json_round_trip(tmp_path):
    o = repetitions_oracle([2, 1, 2, 3])
    path = tmp_path / "space.json"
    save_explicit(o, path)
    doc = json.loads(path.read_text())
    assert doc["default"] == "empty" and doc["n"] == 4
    loaded = load_explicit(path)
    assert all(loaded.evaluate(G) == o.evaluate(G) for G in all_masks(4))
