"""Affine line configurations in T*R ~ R^2: scaling, intersections, angles,
and the classification tables that gate tree construction and disk evaluation.

A configuration is an ordered cyclic list of lines y = a_i x + b_i, each the
graph of the derivative of the quadratic potential f_i = a_i x^2/2 + b_i x
(the additive constant of f_i affects nothing computed here and is fixed to
zero).  Scaling by eps replaces the line with y = eps (a_i x + b_i); the
abscissa of the intersection of consecutive scaled lines is eps-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import DegenerateError

# Relative tolerance for the exact-equality rows of the classification table
# (floating-point input cannot hit p_i == p_j exactly in general).
EQ_TOL = 1e-9


@dataclass(frozen=True)
class AffineLagrangian:
    """The line y = a x + b, i.e. the graph of d/dx (a x^2/2 + b x)."""

    a: float
    b: float

    def height(self, x: float, eps: float = 1.0) -> float:
        return eps * (self.a * x + self.b)


@dataclass(frozen=True)
class Scenario:
    """Ordered cyclic list of k lines plus the scale eps and split radius delta."""

    lagrangians: tuple[AffineLagrangian, ...]
    epsilon: float
    delta: float = 0.25

    def __post_init__(self):
        k = len(self.lagrangians)
        if k not in (3, 4):
            raise DegenerateError(f"need 3 or 4 lines, got {k}")
        if not (self.epsilon > 0.0) or not math.isfinite(self.epsilon):
            raise DegenerateError("epsilon must be a positive finite real")
        if not (0.0 < self.delta < 0.5):
            raise DegenerateError("delta must lie in (0, 1/2)")
        for i in range(k):
            if self.lagrangians[i].a == self.lagrangians[(i + 1) % k].a:
                raise DegenerateError(f"consecutive slopes equal at index {i + 1}")

    @property
    def k(self) -> int:
        return len(self.lagrangians)

    def slope(self, i: int) -> float:
        """Slope a_i with 1-based cyclic indexing (a_{k+1} = a_1)."""
        return self.lagrangians[(i - 1) % self.k].a

    def intercept(self, i: int) -> float:
        return self.lagrangians[(i - 1) % self.k].b

    def with_epsilon(self, eps: float) -> "Scenario":
        return replace(self, epsilon=eps)

    def rotated(self, shift: int) -> "Scenario":
        """Cyclic relabel L'_i = L_{i+shift} (same geometric configuration)."""
        k = self.k
        ls = tuple(self.lagrangians[(i + shift) % k] for i in range(k))
        return replace(self, lagrangians=ls)

    def is_generic(self) -> bool:
        """All slopes pairwise distinct (no parallel pair among the k lines)."""
        slopes = [l.a for l in self.lagrangians]
        return len(set(slopes)) == len(slopes)


@dataclass(frozen=True)
class VertexData:
    """Per-vertex data: intersection point, its eps-free abscissa, angle/pi."""

    x_eps: complex
    p: float
    alpha_eps: float


@dataclass(frozen=True)
class Classification:
    kind: str  # "Triangle" | "ConvexQuad" | "Degenerate"
    table_row: str
    tree_type: Optional[str]  # "tripod" | "A" | "B" | "C"
    sign_p31_p42: Optional[int]  # sign((p3-p1)(p4-p2)), k=4 only

    @property
    def is_polygon(self) -> bool:
        return self.kind in ("Triangle", "ConvexQuad")


@dataclass(frozen=True)
class CriticalPoints:
    p: tuple[float, ...]
    p13: Optional[float]  # critical point of f_3 - f_1 (k=4 with a_3 != a_1)


def _pair_critical(s: Scenario, i: int, j: int) -> float:
    ai, bi = s.slope(i), s.intercept(i)
    aj, bj = s.slope(j), s.intercept(j)
    if aj == ai:
        raise DegenerateError(f"slopes a_{i} and a_{j} coincide")
    return -(bj - bi) / (aj - ai)


def criticals(s: Scenario) -> CriticalPoints:
    """Critical points p_i of f_{i+1} - f_i (cyclic), plus p13 for k=4."""
    p = tuple(_pair_critical(s, i, i + 1) for i in range(1, s.k + 1))
    p13 = None
    if s.k == 4 and s.slope(3) != s.slope(1):
        p13 = _pair_critical(s, 1, 3)
    return CriticalPoints(p=p, p13=p13)


def pair_critical(s: Scenario, i: int, j: int) -> float:
    """Critical point of f_j - f_i (used for internal-edge flows)."""
    return _pair_critical(s, i, j)


def intersections(s: Scenario) -> list[complex]:
    """Intersection x_i of the scaled lines i and i+1, as points of C ~ R^2.

    The abscissa is the critical point p_i for every eps; only the height
    scales.
    """
    out = []
    for i in range(1, s.k + 1):
        p = _pair_critical(s, i, i + 1)
        out.append(complex(p, s.epsilon * (s.slope(i) * p + s.intercept(i))))
    return out


def _neighbor_products(p: tuple[float, ...]) -> list[float]:
    k = len(p)
    return [(p[i % k] - p[i - 1]) * (p[(i - 2) % k] - p[i - 1]) for i in range(1, k + 1)]


def interior_angles(s: Scenario) -> list[float]:
    """Interior angle / pi at each vertex of the scaled polygon.

    alpha_i = |arctan(a_{i+1} eps) - arctan(a_i eps)| / pi when the two
    neighbouring abscissae lie on the same side of p_i, and one minus that
    otherwise.  The sum over a classified polygon is k - 2 up to roundoff.
    """
    p = criticals(s).p
    prods = _neighbor_products(p)
    out = []
    for i in range(1, s.k + 1):
        scale = 1.0 + abs(p[i - 1])
        if abs(prods[i - 1]) < (EQ_TOL * scale) ** 2:
            raise DegenerateError(f"neighbour abscissae coincide with p_{i}")
        base = abs(math.atan(s.slope(i + 1) * s.epsilon) - math.atan(s.slope(i) * s.epsilon)) / math.pi
        out.append(base if prods[i - 1] > 0.0 else 1.0 - base)
    return out


def vertex_data(s: Scenario) -> list[VertexData]:
    xs = intersections(s)
    ps = criticals(s).p
    als = interior_angles(s)
    return [VertexData(x, p, a) for x, p, a in zip(xs, ps, als)]


def _close(u: float, v: float) -> bool:
    return abs(u - v) < EQ_TOL * (1.0 + abs(u) + abs(v))


def _match_order(p: tuple[float, ...], perm: tuple[int, ...], eq_pair=None) -> bool:
    """Check the chain p[perm[0]] < p[perm[1]] < ...; the eq_pair link, if
    given, is required to be a tie (within EQ_TOL) instead of strict."""
    for prev, cur in zip(perm, perm[1:]):
        u, v = p[prev - 1], p[cur - 1]
        if eq_pair is not None and {prev, cur} == set(eq_pair):
            if not _close(u, v):
                return False
        elif not u < v or _close(u, v):
            return False
    return True


# (slope condition name, predicate) -> list of (ordering, eq_pair, tree type)
def _k4_slope_groups(a):
    a1, a2, a3, a4 = a
    inside = lambda x, lo, hi: lo < x < hi
    return [
        ("a2,a4 in (a1,a3)", inside(a2, a1, a3) and inside(a4, a1, a3),
         [((4, 1, 2, 3), None, "C"), ((3, 2, 1, 4), None, "C")]),
        ("a2,a4 in (a3,a1)", inside(a2, a3, a1) and inside(a4, a3, a1),
         [((1, 4, 3, 2), None, "C"), ((2, 3, 4, 1), None, "C")]),
        ("a1,a3 in (a2,a4)", inside(a1, a2, a4) and inside(a3, a2, a4),
         [((1, 2, 3, 4), None, "B"), ((4, 3, 2, 1), None, "B")]),
        ("a1,a3 in (a4,a2)", inside(a1, a4, a2) and inside(a3, a4, a2),
         [((3, 4, 1, 2), None, "B"), ((2, 1, 4, 3), None, "B")]),
        ("max(a1,a3) < min(a2,a4)", max(a1, a3) < min(a2, a4),
         [((4, 1, 3, 2), (1, 3), "A"), ((2, 3, 1, 4), (3, 1), "A"),
          ((4, 1, 3, 2), None, "C"), ((2, 3, 1, 4), None, "C"),
          ((4, 3, 1, 2), None, "B"), ((2, 1, 3, 4), None, "B")]),
        ("max(a2,a4) < min(a1,a3)", max(a2, a4) < min(a1, a3),
         [((1, 4, 2, 3), (4, 2), "A"), ((3, 2, 4, 1), (2, 4), "A"),
          ((1, 4, 2, 3), None, "C"), ((3, 2, 4, 1), None, "C"),
          ((3, 4, 2, 1), None, "B"), ((1, 2, 4, 3), None, "B")]),
    ]


def _order_string(perm, eq_pair):
    parts = [f"p{perm[0]}"]
    for prev, cur in zip(perm, perm[1:]):
        tie = eq_pair is not None and set(eq_pair) == {prev, cur}
        parts.append(("=" if tie else "<") + f"p{cur}")
    return "".join(parts)


def classify(s: Scenario) -> Classification:
    """Match the configuration against the triangle/quadrilateral tables.

    Returns kind "Degenerate" (never raises) when no row matches, so drivers
    can report unclassifiable input.
    """
    p = criticals(s).p
    if s.k == 3:
        for u, v in zip(p, p[1:] + p[:1]):
            if _close(u, v):
                return Classification("Degenerate", "consecutive critical points equal", None, None)
        a1, a2, a3 = (s.slope(i) for i in (1, 2, 3))
        for row, ok in (("a1<a3<a2", a1 < a3 < a2), ("a2<a1<a3", a2 < a1 < a3),
                        ("a3<a2<a1", a3 < a2 < a1)):
            if ok:
                return Classification("Triangle", row, "tripod", None)
        return Classification("Degenerate", "slope ordering not counterclockwise", None, None)

    a = tuple(s.slope(i) for i in (1, 2, 3, 4))
    d31, d42 = p[2] - p[0], p[3] - p[1]
    if _close(p[2], p[0]) or _close(p[3], p[1]):
        sign = 0
    else:
        sign = 1 if d31 * d42 > 0.0 else -1
    for name, holds, rows in _k4_slope_groups(a):
        if not holds:
            continue
        # equality rows are listed first so ties are not shadowed by strict rows
        for perm, eq_pair, tree in rows:
            if _match_order(p, perm, eq_pair):
                row = f"{name}; {_order_string(perm, eq_pair)}"
                return Classification("ConvexQuad", row, tree, sign)
        return Classification("Degenerate", f"{name}; no abscissa ordering matches", None, sign)
    return Classification("Degenerate", "no slope condition matches", None, sign)
