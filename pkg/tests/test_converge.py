import math
import random

import numpy as np
import pytest

from disktree.errors import DegenerateError
from disktree.geometry import AffineLagrangian, Scenario, classify
from disktree.converge import (GridSpec, RegionSpec, analytic_bounds, build_context,
                               canonical_shift, internal_window, phi_ext, phi_int,
                               psi_eps, region_contains, region_list, run_report,
                               sup_error)
from disktree.param import solve_z4

GRID = GridSpec.square(20)

# first-verified-run regression goldens, complement region of the k=3 demo
K3_COMPLEMENT_PINS = {
    0.2: 0.10410516357342277,
    0.1: 0.05418229630101375,
    0.05: 0.027600104249859838,
    0.025: 0.01392374204496145,
}


class TestStripMaps:
    def test_phi_ext_finite(self):
        assert phi_ext(0.0, 0.25, -50.0, 0.3) == pytest.approx(0.0, abs=1e-60)
        assert phi_ext(0.0, 0.25, 0.0, 0.0) == pytest.approx(0.25)
        z = phi_ext(2.0, 0.1, -0.7, 0.4)
        assert abs(abs(z - 2.0) - 0.1 * math.exp(-0.7 * math.pi)) < 1e-15

    def test_phi_ext_infinity(self):
        z = phi_ext(math.inf, 0.25, -0.5, 0.25)
        assert abs(z) == pytest.approx(4.0 * math.exp(0.5 * math.pi))

    def test_phi_int_window_endpoints(self):
        delta, z4 = 0.25, 1e-6
        t1, t2 = internal_window(delta, z4)
        assert phi_int(t1, 1.0) == pytest.approx(delta)
        assert phi_int(t2, 1.0) == pytest.approx(z4 / delta)

    def test_psi(self):
        assert psi_eps(3e-7, 3e-7) == 1.0


class TestRegions:
    def test_cover_k3(self, k3_demo):
        rng = random.Random(2)
        regs = region_list(3)
        for _ in range(500):
            z = complex(rng.uniform(-8, 8), rng.uniform(0, 8))
            assert any(region_contains(r, z, 0.25) for r in regs)

    def test_cover_k4(self, k4_demo):
        s = k4_demo.with_epsilon(0.05)
        z4 = solve_z4(s).z4
        assert z4 < 0.25 ** 2
        rng = random.Random(4)
        regs = region_list(4)
        for _ in range(500):
            z = complex(rng.uniform(-8, 8), rng.uniform(0, 8))
            assert any(region_contains(r, z, 0.25, z4) for r in regs)
        # a few points at the delicate small scales
        for z in (z4 * 0.5j, z4 + z4 * 0.1j, complex(z4 / 0.25 * 0.99, 1e-25),
                  complex(0.25 * 0.5, 1e-30)):
            assert any(region_contains(r, z, 0.25, z4) for r in regs)

    def test_region_names(self):
        names = [r.name() for r in region_list(4)]
        assert names == ["ext_z1", "ext_z2", "ext_z3", "ext_z4", "complement",
                         "rescaled_complement", "internal_annulus"]


class TestCanonicalShift:
    def test_k3_rotations(self, k3_demo):
        for shift in range(3):
            rotated = k3_demo.rotated(shift)
            back = canonical_shift(rotated)
            assert classify(rotated.rotated(back)).table_row == "a2<a1<a3"

    def test_k4_sign_flip(self, k4_demo):
        reflected = k4_demo.rotated(1)  # sign flips to negative
        assert classify(reflected).sign_p31_p42 == -1
        sh = canonical_shift(reflected)
        canon = reflected.rotated(sh)
        c = classify(canon)
        assert c.sign_p31_p42 == 1 and canon.slope(3) > canon.slope(1)

    def test_type_a_rejected(self):
        s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(2, 0),
                      AffineLagrangian(0.5, 1.5), AffineLagrangian(3, 1.5)), epsilon=0.3)
        with pytest.raises(DegenerateError):
            canonical_shift(s)


@pytest.fixture(scope="module")
def k3_report():
    s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(-1, 1),
                  AffineLagrangian(1, 0)), epsilon=0.2, delta=0.25)
    return run_report(s, eps_schedule=(0.2, 0.1, 0.05, 0.025),
                      grid=GridSpec.square(32))


@pytest.fixture(scope="module")
def k4_report():
    s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(-1, 0),
                  AffineLagrangian(0.5, -1.5), AffineLagrangian(1, -2.5)),
                 epsilon=0.2, delta=0.25)
    return run_report(s, eps_schedule=(0.2, 0.1, 0.05), grid=GRID)


class TestK3Report:

    def test_monotone_decrease(self, k3_report):
        for name in ("ext_z1", "ext_z2", "ext_z3", "complement"):
            sups = [r.sup_error for r in k3_report.rows_for(name)]
            assert all(a > b for a, b in zip(sups, sups[1:])), name

    def test_bounds_hold(self, k3_report):
        for r in k3_report.rows:
            assert r.bound is not None and r.sup_error <= r.bound

    def test_regression_goldens(self, k3_report):
        for r in k3_report.rows_for("complement"):
            assert r.sup_error == pytest.approx(K3_COMPLEMENT_PINS[r.epsilon], rel=1e-9)

    def test_inner_outer_split(self):
        s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(-1, 1),
                      AffineLagrangian(1, 0)), epsilon=0.1, delta=0.25)
        ctx = build_context(s)
        from disktree.converge import _k3_bounds, _region_sup

        bounds = _k3_bounds(ctx)
        for part in ("inner", "outer"):
            sup, _ = _region_sup(ctx, RegionSpec("complement", part=part), GRID)
            assert sup <= bounds[f"complement_{part}"]

    def test_strip_target_continuity(self, k3_report):
        # adjacent region targets at a shared interface point differ by at
        # most the sum of the measured sups (triangle inequality sanity)
        rows = {r.region: r for r in k3_report.rows if r.epsilon == 0.025}
        s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(-1, 1),
                      AffineLagrangian(1, 0)), epsilon=0.025, delta=0.25)
        ctx = build_context(s)
        # interface |z - 1| = delta (tau = 0 on strip 1) vs complement
        target_strip = ctx.tree.external[0].value(0.0)
        target_comp = ctx.p0
        gap = abs(target_strip - target_comp)
        assert gap <= rows["ext_z1"].sup_error + rows["complement"].sup_error + 1e-12


class TestK4Report:
    def test_all_regions_present(self, k4_report):
        names = {r.region for r in k4_report.rows}
        assert names == {"ext_z1", "ext_z2", "ext_z3", "ext_z4", "complement",
                         "rescaled_complement", "internal_annulus"}

    def test_monotone_decrease(self, k4_report):
        for name in {r.region for r in k4_report.rows}:
            sups = [r.sup_error for r in k4_report.rows_for(name)]
            assert all(a > b for a, b in zip(sups, sups[1:])), name

    def test_bounds_hold(self, k4_report):
        for r in k4_report.rows:
            assert r.bound is not None and r.sup_error <= r.bound, r

    def test_windows_flagged(self, k4_report):
        for r in k4_report.rows_for("internal_annulus"):
            assert r.windowed and r.z4 < k4_report.delta ** 2

    def test_l_estimate_column(self, k4_report):
        ls = [r.l_estimate for r in k4_report.rows_for("complement")]
        want = 2.0 * math.log(2.0)
        assert abs(ls[-1] - want) < abs(ls[0] - want)

    def test_annulus_skipped_when_z4_large(self, k4_demo):
        # at eps large enough z4 exceeds delta^2 and the window is empty
        s = k4_demo.with_epsilon(3.0)
        z4 = solve_z4(s).z4
        assert z4 >= s.delta ** 2
        rep = run_report(s, eps_schedule=(3.0,), grid=GridSpec.square(8))
        assert not rep.rows_for("internal_annulus")
        assert rep.rows_for("complement")


class TestBounds:
    def test_delta_nonmonotonicity(self, k3_demo):
        # the outer-complement tail grows as delta shrinks with eps fixed
        vals = {}
        for delta in (0.1, 0.25):
            s = Scenario(k3_demo.lagrangians, epsilon=0.1, delta=delta)
            vals[delta] = analytic_bounds(s, RegionSpec("complement", part="outer"),
                                          build_context(s))
        assert vals[0.1] > vals[0.25]

    def test_bounds_shrink_with_eps(self, k4_demo):
        for region in region_list(4):
            if region.kind == "internal_annulus":
                continue
            b = [analytic_bounds(k4_demo.with_epsilon(e), region) for e in (0.2, 0.05)]
            assert b[1] < b[0], region.name()

    def test_sup_error_standalone(self, k3_demo):
        v = sup_error(k3_demo.with_epsilon(0.1), RegionSpec("disk", index=3), GRID)
        assert 0.0 < v < 0.1

    def test_clause_prefactor_consistency(self, k4_demo):
        # _ext_bound anchors must reproduce the clause decomposition exactly:
        # clause(z) = x_i + K u^alpha S(u) with S(0) = 1, so at deep tau the
        # clause value approaches x_i with the K-rate
        ctx = build_context(k4_demo.with_epsilon(0.1))
        from disktree.converge import _k4_bounds

        bounds = _k4_bounds(ctx)  # must evaluate finite
        for name in ("ext_z1", "ext_z2", "ext_z3", "ext_z4", "complement",
                     "rescaled_complement", "internal_annulus"):
            assert math.isfinite(bounds[name]) and bounds[name] > 0.0


class TestHolomorphy:
    def test_cauchy_riemann(self, k4_demo):
        ctx = build_context(k4_demo.with_epsilon(0.2))
        rng = random.Random(12)
        h = 1e-5
        checked = 0
        while checked < 100:
            z = complex(rng.uniform(-1.5, 2.5), rng.uniform(0.05, 2.5))
            tag = ctx.disk.region_tag(z)
            if tag == "quadrature_only":
                continue
            dx = (ctx.disk.eval(z + h) - ctx.disk.eval(z - h)) / (2 * h)
            dy = (ctx.disk.eval(z + 1j * h) - ctx.disk.eval(z - 1j * h)) / (2j * h)
            assert abs(dx - dy) < 1e-6
            checked += 1


class TestStripTail:
    def test_deep_end_error_small(self, k3_demo):
        # at tau = -30/eps both the map and the target sit within ~e^{-30} of
        # the critical point, so the error there is tiny relative to the
        # edge's total variation |p_i - junction|
        s = k3_demo.with_epsilon(0.1)
        ctx = build_context(s)
        tau = -30.0 / s.epsilon
        for i in (1, 3):
            vals = ctx.disk.eval_strip(i, np.array([tau]), np.array([0.5]), s.delta)
            target = ctx.tree.external[i - 1].value(s.epsilon * tau)
            scale = abs(ctx.tree.junction_of_edge(i) - ctx.p[i - 1])
            assert abs(vals[0] - target) < 1e-3 * scale


class TestRotatedInput:
    def test_k4_reflected_scenario_pipeline(self, k4_demo):
        # feeding the relabelled (sign < 0) configuration must canonicalize
        # back and produce the identical report rows
        reflected = k4_demo.rotated(1)
        rep = run_report(reflected, eps_schedule=(0.2, 0.1), grid=GridSpec.square(10))
        base = run_report(k4_demo, eps_schedule=(0.2, 0.1), grid=GridSpec.square(10))
        assert rep.canonical_shift == 3  # 1 (rotated input) + 3 = 0 mod 4
        for a, b in zip(rep.rows, base.rows):
            assert a.region == b.region
            assert a.sup_error == pytest.approx(b.sup_error, rel=1e-9)
            assert a.z4 == pytest.approx(b.z4, rel=1e-6)


class TestRandomScenarioSweep:
    def test_bounds_hold_on_random_rows(self):
        # the measured <= bound invariant must survive arbitrary classified
        # input, not just the demo scenarios; extreme configurations must
        # fail loudly (DegenerateError) rather than mis-evaluate
        import sys
        sys.path.insert(0, str(__import__("pathlib").Path(__file__).parent))
        from conftest import K4_ROWS, random_quad_for_row, random_triangle

        rng = random.Random(1234)
        for _ in range(4):
            s = random_triangle(rng, epsilon=0.2)
            rep = run_report(s, eps_schedule=(0.15, 0.07), grid=GridSpec.square(8))
            for r in rep.rows:
                assert r.bound is not None and r.sup_error <= r.bound, r
        checked = 0
        for group, perm, eq, tree in K4_ROWS:
            if eq is not None:
                continue
            s = random_quad_for_row(rng, group, perm, eq, tree, epsilon=0.2)
            try:
                rep = run_report(s, eps_schedule=(0.1, 0.05), grid=GridSpec.square(8))
            except DegenerateError:
                continue  # underflow / delta-separation limits announce themselves
            checked += 1
            for r in rep.rows:
                assert r.bound is None or r.sup_error <= r.bound, (group, perm, r)
        assert checked >= 10

    def test_underflow_guard_message(self):
        # internal edge too long: z4 underflows and the pipeline says so
        s = Scenario((AffineLagrangian(-2.517, 0.0), AffineLagrangian(-2.321, 0.276),
                      AffineLagrangian(-2.128, 0.401), AffineLagrangian(-2.329, 0.333)),
                     epsilon=0.03)
        with pytest.raises(DegenerateError, match="underflows"):
            build_context(s.rotated(canonical_shift(s)))


def test_junction_is_morse_index_zero(k4_demo):
    # the complement target p0 is the critical point whose difference
    # function has positive curvature (both junctions, in fact)
    ctx = build_context(k4_demo)
    from disktree.geometry import criticals

    p = criticals(ctx.scenario).p
    for junction in (ctx.p0, ctx.p0p):
        i = p.index(junction) + 1
        assert ctx.scenario.slope(i + 1) - ctx.scenario.slope(i) > 0.0
