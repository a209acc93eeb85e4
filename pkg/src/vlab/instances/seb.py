"""Smallest enclosing ball, exact and floating point.

Exact mode runs on :class:`fractions.Fraction` coordinates so boundary
membership (and hence degeneracy) is decided without rounding.  The ball of
a set is computed with Welzl's move-to-front recursion; a brute-force search
over support sets serves as the independent check.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from ..errors import NumericInstability
from ..spaces import ViolatorOracle
from ..subsets import ConstraintSet, full_mask, indices

Point = tuple
MAX_DIM = 8
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Ball:
    center: Point | None
    sq_radius: object  # Fraction, float, or -inf for the empty ball

    @property
    def is_empty(self) -> bool:
        return self.center is None

    def sq_dist(self, p: Point):
        return sum((a - b) * (a - b) for a, b in zip(p, self.center))

    def contains(self, p: Point, tol: float = 0.0) -> bool:
        if self.center is None:
            return False
        if tol:
            return self.sq_dist(p) <= self.sq_radius + tol * max(1.0, abs(self.sq_radius))
        return self.sq_dist(p) <= self.sq_radius


NO_BALL = Ball(None, float("-inf"))


@dataclass
class PointSet:
    d: int
    points: list[Point]
    exact: bool = True

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("ambient dimension must be at least 1")
        conv = Fraction if self.exact else float
        pts = []
        for p in self.points:
            if len(p) != self.d:
                raise ValueError(f"point {p} does not have {self.d} coordinates")
            pts.append(tuple(conv(c) for c in p))
        self.points = pts

    def __len__(self):
        return len(self.points)


def circumball(support: Sequence[Point], exact: bool = True) -> Ball | None:
    """Smallest ball with all of ``support`` on its boundary.

    The center lies in the affine hull of the support.  Returns ``None`` if
    the support is affinely dependent (exact mode), raises
    :class:`NumericInstability` if it is nearly so (float mode).
    """
    if not support:
        return NO_BALL
    p0 = support[0]
    if len(support) == 1:
        return Ball(tuple(p0), 0 if exact else 0.0)
    us = [tuple(a - b for a, b in zip(p, p0)) for p in support[1:]]
    m = len(us)
    gram = [[2 * sum(a * b for a, b in zip(us[i], us[j])) for j in range(m)] for i in range(m)]
    rhs = [sum(a * a for a in u) for u in us]
    if exact:
        lam = _solve_exact(gram, rhs)
        if lam is None:
            return None
    else:
        G = np.array(gram, dtype=float)
        cond = np.linalg.cond(G)
        if not np.isfinite(cond) or cond > 1e8:
            raise NumericInstability("support set is nearly affinely dependent")
        lam = np.linalg.solve(G, np.array(rhs, dtype=float)).tolist()
    offset = [sum(lam[i] * us[i][c] for i in range(m)) for c in range(len(p0))]
    center = tuple(a + b for a, b in zip(p0, offset))
    return Ball(center, sum(c * c for c in offset))


def _solve_exact(A, b):
    """Gauss-Jordan elimination over the rationals; ``None`` if singular."""
    m = len(b)
    M = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(A)]
    for col in range(m):
        pivot = next((r for r in range(col, m) if M[r][col] != 0), None)
        if pivot is None:
            return None
        M[col], M[pivot] = M[pivot], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(m):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][m] for i in range(m)]


def _mtf(points, order, end, support, d, exact):
    ball = circumball(support, exact)
    if ball is None:
        raise ArithmeticError("affinely dependent support set in exact Welzl recursion")
    if len(support) == d + 1:
        return ball
    tol = 0.0 if exact else DEFAULT_TOL
    for i in range(end):
        p = points[order[i]]
        if not ball.contains(p, tol):
            ball = _mtf(points, order, i, support + [p], d, exact)
            order.insert(0, order.pop(i))
    return ball


def welzl(points: Sequence[Point], d: int, *, exact: bool = True, seed: int | None = 0) -> Ball:
    """Move-to-front Welzl; ``seed`` fixes the initial shuffle (``None`` keeps input order)."""
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    order = list(range(len(points)))
    if seed is not None:
        random.Random(seed).shuffle(order)
    return _mtf(list(points), order, len(order), [], d, exact)


def smallest_enclosing_ball(points: PointSet, *, seed: int | None = 0) -> Ball:
    if not points.points:
        return NO_BALL
    return welzl(points.points, points.d, exact=points.exact, seed=seed)


def brute_force_ball(points: Sequence[Point], d: int) -> Ball:
    """Minimum over all circumballs of at most ``d + 1`` points that enclose everything."""
    if not points:
        return NO_BALL
    best = None
    for size in range(1, min(d + 1, len(points)) + 1):
        for support in combinations(points, size):
            ball = circumball(list(support), exact=True)
            if ball is None:
                continue
            if best is not None and ball.sq_radius >= best.sq_radius:
                continue
            if all(ball.contains(p) for p in points):
                best = ball
    return best


class SEBOracle(ViolatorOracle):
    """Violators of ``G``: points outside ``G`` strictly outside the ball of ``G``.

    ``empty="all"`` is the LP-type reading (radius of the empty set is -inf,
    so every point violates it); ``empty="none"`` sets ``V(empty) = empty``.
    """

    def __init__(self, points: PointSet, *, tol: float = DEFAULT_TOL, empty: str = "all",
                 seed: int = 0, labels=None):
        super().__init__(len(points), labels)
        if empty not in ("all", "none"):
            raise ValueError("empty must be 'all' or 'none'")
        self.points = points
        self.tol = 0.0 if points.exact else tol
        self.empty = empty
        self._rank = list(range(len(points)))
        random.Random(seed).shuffle(self._rank)
        self._balls: dict[int, Ball] = {}
        self.objective = self.sq_radius

    def ball(self, G: ConstraintSet) -> Ball:
        cached = self._balls.get(G)
        if cached is not None:
            return cached
        members = sorted(indices(G), key=self._rank.__getitem__)
        pts = [self.points.points[i] for i in members]
        ball = welzl(pts, self.points.d, exact=self.points.exact, seed=None) if pts else NO_BALL
        if self.n <= 20:
            self._balls[G] = ball
        return ball

    def sq_radius(self, G: ConstraintSet):
        return self.ball(G).sq_radius

    def evaluate(self, G):
        outside = full_mask(self.n) & ~G
        if G == 0:
            return outside if self.empty == "all" else 0
        ball = self.ball(G)
        V = 0
        for i in indices(outside):
            if not ball.contains(self.points.points[i], self.tol):
                V |= 1 << i
        return V


def seb_oracle(points: PointSet, *, tol: float = DEFAULT_TOL, empty: str = "all", seed: int = 0) -> SEBOracle:
    return SEBOracle(points, tol=tol, empty=empty, seed=seed)


def read_points(path, *, exact: bool = True) -> PointSet:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            row = [c.strip() for c in row if c.strip()]
            if not row or row[0].startswith("#"):
                continue
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no points")
    return PointSet(len(rows[0]), rows, exact=exact)


def _fmt(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(c)


def write_points(points: PointSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for p in points.points:
            w.writerow([_fmt(c) for c in p])


def random_integer_points(n: int, d: int, rng, *, lo: int = -10, hi: int = 10) -> PointSet:
    coords = rng.integers(lo, hi + 1, size=(n, d)).tolist()
    return PointSet(d, [tuple(row) for row in coords], exact=True)


def lattice_circle(sq_radius: int) -> list[Point]:
    """Integer points on the circle ``x^2 + y^2 = sq_radius``, sorted by angle."""
    r = math.isqrt(sq_radius)
    pts = []
    for x in range(-r, r + 1):
        y2 = sq_radius - x * x
        y = math.isqrt(y2)
        if y * y == y2:
            pts.append((x, y))
            if y:
                pts.append((x, -y))
    return sorted(pts, key=lambda p: math.atan2(p[1], p[0]))


def search_circle_configuration(*, k: int = 1, sq_radii=(25, 50, 65, 85, 125)):
    """First integer configuration of four cocircular points plus the center
    whose removal profile certifies ``Delta_1 = 5 > delta + 1``.

    Returns ``(PointSet, delta_k, dimension)`` or ``None``.
    """
    from ..sampling import delta_k
    from ..spaces import combinatorial_dimension

    for sq in sq_radii:
        circle = lattice_circle(sq)
        for quad in combinations(circle, 4):
            # no diametrically opposite pair: the four points are in general position on the circle
            if any(a[0] == -b[0] and a[1] == -b[1] for a, b in combinations(quad, 2)):
                continue
            ps = PointSet(2, list(quad) + [(0, 0)])
            oracle = seb_oracle(ps)
            dk = delta_k(oracle, k)
            dim = combinatorial_dimension(oracle)
            if dk == 5 and dim + 1 == 4:
                return ps, dk, dim
    return None
