from .families import (
    AllExtremeOracle,
    DSmallestOracle,
    RepetitionsOracle,
    all_extreme_oracle,
    d_smallest_oracle,
    read_multiset,
    repetitions_oracle,
    write_multiset,
)
from .lptype import LPTypeAdapter, check_lp_type_axioms, d_smallest_adapter, seb_adapter
from .random_space import RandomConsistentOracle, RandomConsistentSpaceParams, random_consistent_oracle
from .seb import (
    NO_BALL,
    Ball,
    PointSet,
    SEBOracle,
    brute_force_ball,
    read_points,
    seb_oracle,
    smallest_enclosing_ball,
    welzl,
    write_points,
)

__all__ = [
    "AllExtremeOracle", "Ball", "DSmallestOracle", "LPTypeAdapter", "NO_BALL", "PointSet",
    "RandomConsistentOracle", "RandomConsistentSpaceParams", "RepetitionsOracle", "SEBOracle",
    "all_extreme_oracle", "brute_force_ball", "check_lp_type_axioms", "d_smallest_adapter",
    "d_smallest_oracle", "random_consistent_oracle", "read_multiset", "read_points",
    "repetitions_oracle", "seb_adapter", "seb_oracle", "smallest_enclosing_ball", "welzl",
    "write_multiset", "write_points",
]
