"""Shared scenario generators for the test suite."""

from __future__ import annotations

import random

import pytest

from disktree.errors import DegenerateError
from disktree.geometry import AffineLagrangian, Scenario, classify, criticals

# Classification table rows: (group, permutation of p-indices in increasing
# order, tied pair or None, tree type).
K4_ROWS = [
    ("a2,a4 in (a1,a3)", (4, 1, 2, 3), None, "C"),
    ("a2,a4 in (a1,a3)", (3, 2, 1, 4), None, "C"),
    ("a2,a4 in (a3,a1)", (1, 4, 3, 2), None, "C"),
    ("a2,a4 in (a3,a1)", (2, 3, 4, 1), None, "C"),
    ("a1,a3 in (a2,a4)", (1, 2, 3, 4), None, "B"),
    ("a1,a3 in (a2,a4)", (4, 3, 2, 1), None, "B"),
    ("a1,a3 in (a4,a2)", (3, 4, 1, 2), None, "B"),
    ("a1,a3 in (a4,a2)", (2, 1, 4, 3), None, "B"),
    ("max(a1,a3) < min(a2,a4)", (4, 1, 3, 2), None, "C"),
    ("max(a1,a3) < min(a2,a4)", (2, 3, 1, 4), None, "C"),
    ("max(a1,a3) < min(a2,a4)", (4, 3, 1, 2), None, "B"),
    ("max(a1,a3) < min(a2,a4)", (2, 1, 3, 4), None, "B"),
    ("max(a1,a3) < min(a2,a4)", (4, 1, 3, 2), (1, 3), "A"),
    ("max(a1,a3) < min(a2,a4)", (2, 3, 1, 4), (3, 1), "A"),
    ("max(a2,a4) < min(a1,a3)", (1, 4, 2, 3), None, "C"),
    ("max(a2,a4) < min(a1,a3)", (3, 2, 4, 1), None, "C"),
    ("max(a2,a4) < min(a1,a3)", (3, 4, 2, 1), None, "B"),
    ("max(a2,a4) < min(a1,a3)", (1, 2, 4, 3), None, "B"),
    ("max(a2,a4) < min(a1,a3)", (1, 4, 2, 3), (4, 2), "A"),
    ("max(a2,a4) < min(a1,a3)", (3, 2, 4, 1), (2, 4), "A"),
]


def sample_slopes(group: str, rng: random.Random) -> tuple[float, float, float, float]:
    def pair_inside(lo, hi):
        return rng.uniform(lo, hi), rng.uniform(lo, hi)

    lo, hi = sorted((rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)))
    if hi - lo < 0.3:
        hi = lo + 0.3 + rng.uniform(0.0, 2.0)
    if group == "a2,a4 in (a1,a3)":
        a1, a3 = lo, hi
        a2, a4 = pair_inside(lo + 0.05, hi - 0.05)
    elif group == "a2,a4 in (a3,a1)":
        a3, a1 = lo, hi
        a2, a4 = pair_inside(lo + 0.05, hi - 0.05)
    elif group == "a1,a3 in (a2,a4)":
        a2, a4 = lo, hi
        a1, a3 = pair_inside(lo + 0.05, hi - 0.05)
    elif group == "a1,a3 in (a4,a2)":
        a4, a2 = lo, hi
        a1, a3 = pair_inside(lo + 0.05, hi - 0.05)
    elif group == "max(a1,a3) < min(a2,a4)":
        a1, a3 = pair_inside(lo - 2.0, lo)
        a2, a4 = pair_inside(hi, hi + 2.0)
    elif group == "max(a2,a4) < min(a1,a3)":
        a2, a4 = pair_inside(lo - 2.0, lo)
        a1, a3 = pair_inside(hi, hi + 2.0)
    else:
        raise ValueError(group)
    return a1, a2, a3, a4


def quad_from_abscissae(a, p1: float, p2: float, p3: float,
                        epsilon: float = 0.3) -> Scenario:
    """Build the four lines realizing critical points p1, p2, p3 (p4 follows)."""
    b = [0.0]
    for i, p in enumerate((p1, p2, p3)):
        b.append(b[i] - p * (a[i + 1] - a[i]))
    return Scenario(tuple(AffineLagrangian(ai, bi) for ai, bi in zip(a, b)),
                    epsilon=epsilon)


def random_quad_for_row(rng: random.Random, group: str, perm, eq_pair, tree: str,
                        epsilon: float = 0.3, max_tries: int = 2000) -> Scenario:
    """Rejection-sample a scenario classified exactly into the requested row.

    p4 is determined by the slopes and (p1, p2, p3); ties involving it are
    imposed by solving the affine relation rather than by assignment.
    """
    order = {idx: pos for pos, idx in enumerate(perm)}
    for _ in range(max_tries):
        a = sample_slopes(group, rng)
        if eq_pair is None:
            vals = sorted(rng.uniform(-2.0, 2.0) for _ in range(3))
            free = sorted((1, 2, 3), key=lambda i: order[i])
            p = {i: v for i, v in zip(free, vals)}
        elif set(eq_pair) == {1, 3}:
            v0, v1 = rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)
            p = {1: v0, 3: v0, 2: v1}
        else:  # tie p2 = p4: solve the affine constraint for p2
            den = (a[2] - a[1]) + (a[0] - a[3])
            if abs(den) < 1e-9:
                continue
            p1v, p3v = rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)
            p2v = -(p1v * (a[1] - a[0]) + p3v * (a[3] - a[2])) / den
            p = {1: p1v, 2: p2v, 3: p3v}
        try:
            s = quad_from_abscissae(a, p[1], p[2], p[3], epsilon)
        except DegenerateError:
            continue
        c = classify(s)
        if c.kind != "ConvexQuad" or c.tree_type != tree:
            continue
        got = criticals(s).p
        if all(got[i - 1] < got[j - 1] for i, j in zip(perm, perm[1:])
               if eq_pair is None or {i, j} != set(eq_pair)):
            return s
    raise RuntimeError(f"could not sample row {group} {perm} {eq_pair}")


def random_triangle(rng: random.Random, epsilon: float = 1.0) -> Scenario:
    while True:
        u = sorted(rng.uniform(-4.0, 4.0) for _ in range(3))
        if u[1] - u[0] < 0.05 or u[2] - u[1] < 0.05:
            continue
        pattern = rng.choice([(1, 0, 2), (2, 1, 0), (0, 2, 1)])  # the ccw orders
        a = tuple(u[i] for i in pattern)
        b = tuple(rng.uniform(-3.0, 3.0) for _ in range(3))
        try:
            s = Scenario(tuple(AffineLagrangian(x, y) for x, y in zip(a, b)),
                         epsilon=epsilon)
        except DegenerateError:
            continue
        if classify(s).kind == "Triangle":
            return s


@pytest.fixture
def k3_demo() -> Scenario:
    return Scenario((AffineLagrangian(0.0, 0.0), AffineLagrangian(-1.0, 1.0),
                     AffineLagrangian(1.0, 0.0)), epsilon=1.0, delta=0.25)


@pytest.fixture
def k4_demo() -> Scenario:
    return Scenario((AffineLagrangian(0.0, 0.0), AffineLagrangian(-1.0, 0.0),
                     AffineLagrangian(0.5, -1.5), AffineLagrangian(1.0, -2.5)),
                    epsilon=0.2, delta=0.25)
