import math
import random

import pytest
from scipy.integrate import solve_ivp

from disktree.errors import DegenerateError, RangeError
from disktree.geometry import AffineLagrangian, Scenario, classify, criticals
from disktree.gradtree import build_gradient_tree, eval_tree, internal_edge_length

from conftest import K4_ROWS, random_quad_for_row


def flow_rhs(s, lef, rig):
    da = s.slope(rig) - s.slope(lef)
    db = s.intercept(rig) - s.intercept(lef)
    return lambda t, y: -(da * y + db)


class TestTripod:
    def test_demo_curves(self, k3_demo):
        tree = build_gradient_tree(k3_demo)
        i1, i2, i3 = tree.external
        assert (i1.kind, i1.coeff, i1.rate, i1.offset) == ("exponential", -0.5, -1.0, 1.0)
        assert (i2.kind, i2.offset) == ("constant", 0.5)
        assert (i3.kind, i3.coeff, i3.rate) == ("exponential", 0.5, -1.0)
        assert tree.junctions == (0.5,)

    def test_ode_oracle(self, k3_demo):
        # integrate backward from the junction; the flow contracts toward p_i
        tree = build_gradient_tree(k3_demo)
        for i in (1, 3):
            rhs = flow_rhs(k3_demo, i, i + 1)
            sol = solve_ivp(rhs, (0.0, -20.0), [tree.junctions[0]],
                            dense_output=True, rtol=1e-11, atol=1e-12)
            for t in (-0.3, -1.0, -2.5, -5.0):
                assert abs(sol.sol(t)[0] - eval_tree(tree, f"e{i}", t)) < 1e-8

    def test_deep_limit(self, k3_demo):
        tree = build_gradient_tree(k3_demo)
        p = criticals(k3_demo).p
        for i in (1, 2, 3):
            assert abs(eval_tree(tree, f"e{i}", -30.0) - p[i - 1]) < math.exp(-29)


class TestInternalEdge:
    def test_demo_length(self, k4_demo):
        c = classify(k4_demo)
        assert abs(internal_edge_length(k4_demo, c) - 2.0 * math.log(2.0)) < 1e-14

    def test_time_of_flight_oracle(self, k4_demo):
        tree = build_gradient_tree(k4_demo)
        lef, rig = tree.internal_pair
        rhs = flow_rhs(k4_demo, lef, rig)
        u0, u1 = tree.junctions
        hit = lambda t, y: y[0] - u1
        hit.terminal, hit.direction = True, 0
        sol = solve_ivp(rhs, (0.0, 100.0), [u0], events=hit, rtol=1e-12, atol=1e-13)
        assert sol.t_events[0].size == 1
        assert abs(sol.t_events[0][0] - tree.topology.internal_length) < 1e-8

    def test_linear_case(self):
        # a2 == a4 makes the internal flow linear with positive length
        s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(1, -0.5),
                      AffineLagrangian(2, -1.5), AffineLagrangian(1, 0.5)), epsilon=0.2)
        c = classify(s)
        assert c.tree_type == "C"
        tree = build_gradient_tree(s, c)
        assert tree.internal.kind == "linear"
        length = tree.topology.internal_length
        assert length == pytest.approx(0.5) and length > 0.0
        # time-of-flight oracle for the linear flow too
        rhs = flow_rhs(s, *tree.internal_pair)
        hit = lambda t, y: y[0] - tree.junctions[1]
        hit.terminal = True
        sol = solve_ivp(rhs, (0.0, 50.0), [tree.junctions[0]], events=hit,
                        rtol=1e-12, atol=1e-13)
        assert abs(sol.t_events[0][0] - length) < 1e-9

    def test_type_a_collapses(self):
        s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(2, 0),
                      AffineLagrangian(0.5, 1.5), AffineLagrangian(3, 1.5)), epsilon=0.3)
        c = classify(s)
        assert c.tree_type == "A"
        assert internal_edge_length(s, c) == 0.0
        tree = build_gradient_tree(s, c)
        assert tree.internal is None and len(tree.junctions) == 1
        # all four external curves share the single junction
        for i in range(1, 5):
            assert abs(eval_tree(tree, f"e{i}", 0.0) - tree.junctions[0]) < 1e-12


class TestRandomRows:
    def test_construction_and_continuity(self):
        rng = random.Random(21)
        for group, perm, eq, tree_type in K4_ROWS:
            for _ in range(20):
                s = random_quad_for_row(rng, group, perm, eq, tree_type)
                tree = build_gradient_tree(s)  # raises if continuity fails
                assert tree.topology.kind == tree_type
                if tree_type in ("B", "C"):
                    assert tree.topology.internal_length > 0.0

    def test_finite_difference_flow(self):
        rng = random.Random(22)
        h = 1e-6
        for group, perm, eq, tree_type in K4_ROWS[::3]:
            s = random_quad_for_row(rng, group, perm, eq, tree_type)
            tree = build_gradient_tree(s)
            for i, curve in enumerate(tree.external, start=1):
                rhs = flow_rhs(s, i, i + 1)
                for t in (-2.0, -0.5, -0.1):
                    fd = (curve.value(t + h) - curve.value(t - h)) / (2 * h)
                    assert abs(fd - rhs(t, curve.value(t))) < 1e-5
            if tree.internal is not None:
                rhs = flow_rhs(s, *tree.internal_pair)
                l = tree.topology.internal_length
                for t in (0.25 * l, 0.75 * l):
                    fd = (tree.internal.value(t + h) - tree.internal.value(t - h)) / (2 * h)
                    assert abs(fd - rhs(t, tree.internal.value(t))) < 1e-5


class TestEvalTree:
    def test_ranges(self, k4_demo):
        tree = build_gradient_tree(k4_demo)
        l = tree.topology.internal_length
        assert eval_tree(tree, "int", 0.0) == tree.junctions[0]
        assert abs(eval_tree(tree, "int", l) - tree.junctions[1]) < 1e-10
        with pytest.raises(RangeError):
            eval_tree(tree, "e1", 0.5)
        with pytest.raises(RangeError):
            eval_tree(tree, "int", l + 1.0)
        with pytest.raises(RangeError):
            eval_tree(tree, "e9", -1.0)
        with pytest.raises(RangeError):
            eval_tree(tree, "bogus", 0.0)

    def test_degenerate_rejected(self):
        s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(1, -1),
                      AffineLagrangian(-1, 2)), epsilon=1.0)
        with pytest.raises(DegenerateError):
            build_gradient_tree(s)
