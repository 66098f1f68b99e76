"""Closed-form gradient trees for classified line configurations.

Each external edge e_i carries the flow dI/dt = -grad(f_{i+1} - f_i) on
(-inf, 0] with I -> p_i at -inf; because the potentials are quadratic, the
solution is either the constant p_i (when a_{i+1} > a_i, forcing the free
coefficient to vanish) or an exponential whose t=0 value is pinned to the
junction by continuity.  The internal edge of a four-line tree flows
-grad(f_3 - f_1) (type B) or -grad(f_4 - f_2) (type C) between the two
junction values, with an explicit length, degenerating to a linear flow when
the two driving slopes coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateError, RangeError
from .geometry import Classification, Scenario, classify, criticals, pair_critical

_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class EdgeCurve:
    """One edge's trajectory: exponential A e^{-rate t} + offset, constant, or
    linear A t + offset."""

    kind: str  # "exponential" | "constant" | "linear"
    coeff: float
    rate: float
    offset: float

    def value(self, t: float) -> float:
        if self.kind == "exponential":
            return self.coeff * math.exp(-self.rate * t) + self.offset
        if self.kind == "linear":
            return self.coeff * t + self.offset
        return self.offset

    def derivative(self, t: float) -> float:
        if self.kind == "exponential":
            return -self.rate * self.coeff * math.exp(-self.rate * t)
        if self.kind == "linear":
            return self.coeff
        return 0.0


@dataclass(frozen=True)
class TreeTopology:
    kind: str  # "tripod" | "A" | "B" | "C"
    internal_length: float


@dataclass(frozen=True)
class GradientTree:
    topology: TreeTopology
    external: tuple[EdgeCurve, ...]
    internal: Optional[EdgeCurve]
    junctions: tuple[float, ...]  # start junction, then end junction if distinct
    # internal flow label (lef, rig): (1, 3) for type B, (2, 4) for type C
    internal_pair: Optional[tuple[int, int]]

    def junction_of_edge(self, i: int) -> float:
        """Junction value the external edge i (1-based) attaches to at t=0."""
        k = len(self.external)
        if self.topology.kind in ("tripod", "A"):
            return self.junctions[0]
        if self.topology.kind == "B":
            return self.junctions[0] if i in (1, 2) else self.junctions[1]
        return self.junctions[0] if i in (2, 3) else self.junctions[1]


def _ascents(s: Scenario) -> list[int]:
    return [i for i in range(1, s.k + 1) if s.slope(i + 1) > s.slope(i)]


def _external_curves(s: Scenario, p, junction_of) -> tuple[EdgeCurve, ...]:
    out = []
    for i in range(1, s.k + 1):
        rate = s.slope(i + 1) - s.slope(i)
        if rate > 0.0:
            out.append(EdgeCurve("constant", 0.0, 0.0, p[i - 1]))
        else:
            out.append(EdgeCurve("exponential", junction_of(i) - p[i - 1], rate, p[i - 1]))
    return tuple(out)


def internal_edge_length(s: Scenario, c: Classification) -> float:
    """Length of the internal edge (0 for tripod/type A)."""
    if c.tree_type in ("tripod", "A"):
        return 0.0
    if c.tree_type not in ("B", "C"):
        raise DegenerateError("internal edge length needs a classified tree")
    p = criticals(s).p
    ascents = set(_ascents(s))
    if c.tree_type == "B":
        lo_pair, hi_pair, (lef, rig) = (1, 2), (3, 4), (1, 3)
    else:
        lo_pair, hi_pair, (lef, rig) = (2, 3), (4, 1), (2, 4)
    u0 = next(p[i - 1] for i in lo_pair if i in ascents)
    u1 = next(p[i - 1] for i in hi_pair if i in ascents)
    da = s.slope(rig) - s.slope(lef)
    db = s.intercept(rig) - s.intercept(lef)
    if da == 0.0:
        # linear flow: I(t) = -db t + u0, so l = (u0 - u1)/db
        length = (u0 - u1) / db
    else:
        pc = pair_critical(s, lef, rig)
        ratio = (pc - u1) / (pc - u0)
        if ratio <= 0.0:
            raise DegenerateError("internal edge ratio not positive; classification inconsistent")
        length = -math.log(ratio) / da
    if length <= 0.0:
        raise DegenerateError("internal edge length not positive; classification inconsistent")
    return length


def build_gradient_tree(s: Scenario, c: Optional[Classification] = None) -> GradientTree:
    """Construct the unique gradient tree of a classified configuration."""
    if c is None:
        c = classify(s)
    if not c.is_polygon:
        raise DegenerateError(f"cannot build a tree for {c.kind}: {c.table_row}")
    p = criticals(s).p
    ascents = _ascents(s)

    if s.k == 3:
        (i0,) = ascents
        junction = p[i0 - 1]
        ext = _external_curves(s, p, lambda i: junction)
        tree = GradientTree(TreeTopology("tripod", 0.0), ext, None, (junction,), None)
        _check_continuity(tree)
        return tree

    if c.tree_type == "A":
        junction = p[ascents[0] - 1]
        ext = _external_curves(s, p, lambda i: junction)
        tree = GradientTree(TreeTopology("A", 0.0), ext, None, (junction,), None)
        _check_continuity(tree)
        return tree

    if c.tree_type == "B":
        lo_pair, hi_pair, (lef, rig) = (1, 2), (3, 4), (1, 3)
    else:
        lo_pair, hi_pair, (lef, rig) = (2, 3), (4, 1), (2, 4)
    aset = set(ascents)
    u0 = next(p[i - 1] for i in lo_pair if i in aset)
    u1 = next(p[i - 1] for i in hi_pair if i in aset)
    length = internal_edge_length(s, c)
    da = s.slope(rig) - s.slope(lef)
    db = s.intercept(rig) - s.intercept(lef)
    if da == 0.0:
        internal = EdgeCurve("linear", -db, 0.0, u0)
    else:
        pc = pair_critical(s, lef, rig)
        internal = EdgeCurve("exponential", u0 - pc, da, pc)

    def junction_of(i: int) -> float:
        return u0 if i in lo_pair else u1

    ext = _external_curves(s, p, junction_of)
    tree = GradientTree(TreeTopology(c.tree_type, length), ext, internal, (u0, u1), (lef, rig))
    _check_continuity(tree)
    return tree


def _check_continuity(tree: GradientTree, tol: float = 1e-10):
    for i, curve in enumerate(tree.external, start=1):
        j = tree.junction_of_edge(i)
        if abs(curve.value(0.0) - j) > tol * (1.0 + abs(j)):
            raise DegenerateError(f"continuity violated at external edge {i}")
    if tree.internal is not None:
        l = tree.topology.internal_length
        u0, u1 = tree.junctions
        if abs(tree.internal.value(0.0) - u0) > tol * (1.0 + abs(u0)):
            raise DegenerateError("continuity violated at internal edge start")
        if abs(tree.internal.value(l) - u1) > tol * (1.0 + abs(u1)):
            raise DegenerateError("continuity violated at internal edge end")


def eval_tree(tree: GradientTree, edge: str, t: float) -> float:
    """Evaluate edge "e1".."ek" on (-inf, 0] or "int" on [0, l]."""
    if edge == "int":
        if tree.internal is None:
            raise RangeError("tree has no internal edge")
        l = tree.topology.internal_length
        if not (-_RANGE_SLACK <= t <= l + _RANGE_SLACK):
            raise RangeError(f"internal parameter {t} outside [0, {l}]")
        return tree.internal.value(t)
    if not (edge.startswith("e") and edge[1:].isdigit()):
        raise RangeError(f"unknown edge {edge!r}")
    i = int(edge[1:])
    if not (1 <= i <= len(tree.external)):
        raise RangeError(f"unknown edge {edge!r}")
    if t > _RANGE_SLACK:
        raise RangeError(f"external parameter {t} outside (-inf, 0]")
    return tree.external[i - 1].value(min(t, 0.0))
