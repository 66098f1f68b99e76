"""Sup-norm convergence measurement of disk maps toward gradient trees.

The closed upper half plane is decomposed into neighbourhoods of the marked
points (strips, via log coordinates), complement regions converging to the
junction values, and, for four lines, a shrinking internal annulus whose strip
carries the internal edge.  Each region gets a measured grid sup of
|w_eps - target| and, where the inequality chains support one, a closed-form
analytic bound evaluated from the same hypergeometric building blocks.

Everything here works in a canonical frame: configurations are cyclically
relabelled so that three-line scenarios satisfy a2 < a1 < a3, and four-line
ones satisfy (p3 - p1)(p4 - p2) > 0 with a3 > a1 (the relabel that maps the
accessory parameter to 1 - z4 when the product is negative).  The report
records the applied shift.
"""

from __future__ import annotations

import math
import platform
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import __version__
from .errors import DegenerateError, DomainError, RangeError
from .geometry import (Classification, Scenario, classify, criticals,
                       interior_angles, intersections, pair_critical)
from .gradtree import EdgeCurve, GradientTree, build_gradient_tree, internal_edge_length
from .param import Z4Solution, solve_z4
from .scmap import DiskMap, x13
from .specfun import appell_f1, gamma_ratio, gauss_2f1, gauss_2f1_complement

TAU_MIN = -30.0  # numeric stand-in for -infinity in external strips
_POLAR_GAP = 0.05  # radial exclusion exponent around |z| = 1 (slow series zone)


class StripPoint(NamedTuple):
    tau: float
    sigma: float


@dataclass(frozen=True)
class GridSpec:
    tau_samples: int = 64
    sigma_samples: int = 64
    polar_samples: int = 64

    @classmethod
    def square(cls, n: int) -> "GridSpec":
        return cls(tau_samples=n, sigma_samples=n, polar_samples=n)


@dataclass(frozen=True)
class RegionSpec:
    kind: str  # "disk" | "complement" | "rescaled_complement" | "internal_annulus"
    index: Optional[int] = None  # 1-based marked-point index for "disk"
    part: Optional[str] = None  # "inner" / "outer" split of complement kinds

    def name(self) -> str:
        if self.kind == "disk":
            return f"ext_z{self.index}"
        if self.kind == "internal_annulus":
            return "internal_annulus"
        base = self.kind
        return base if self.part is None else f"{base}_{self.part}"


def phi_ext(p: float, delta: float, tau, sigma):
    """Strip chart of the disk at prevertex p (p = inf allowed): tau < 0."""
    w = math.pi * (np.asarray(tau, dtype=float) + 1j * np.asarray(sigma, dtype=float))
    if math.isinf(p):
        out = -(1.0 / delta) * np.exp(-w)
    else:
        out = p + delta * np.exp(w)
    return complex(out) if out.ndim == 0 else out


def phi_int(tau, sigma):
    """Chart of the internal annulus: |phi| runs from delta down to z4/delta."""
    out = np.exp(-math.pi * np.asarray(tau, dtype=float)
                 + 1j * math.pi * (1.0 - np.asarray(sigma, dtype=float)))
    return complex(out) if out.ndim == 0 else out


def psi_eps(z, z4: float):
    """Rescaling z -> z / z4 that blows up the collapsing prevertex pair."""
    return z / z4


def internal_window(delta: float, z4: float) -> tuple[float, float]:
    return (-math.log(delta) / math.pi, (-math.log(z4) + math.log(delta)) / math.pi)


def region_list(k: int) -> list[RegionSpec]:
    regs = [RegionSpec("disk", index=i) for i in range(1, k + 1)]
    regs.append(RegionSpec("complement"))
    if k == 4:
        regs.append(RegionSpec("rescaled_complement"))
        regs.append(RegionSpec("internal_annulus"))
    return regs


def region_contains(region: RegionSpec, z: complex, delta: float,
                    z4: Optional[float] = None) -> bool:
    """Membership test of the decomposition (closed complement, open disks)."""
    az = abs(z)
    if region.kind == "disk":
        i = region.index
        if i == 1:
            return abs(z - 1.0) < delta
        if i == 2:
            return az > 1.0 / delta
        if i == 3:
            r = delta if z4 is None else z4 * delta
            return az < r
        return abs(z - z4) < z4 * delta
    if region.kind == "complement":
        return abs(z - 1.0) >= delta and delta <= az <= 1.0 / delta
    if region.kind == "rescaled_complement":
        zeta = z / z4
        return (abs(zeta) >= delta and abs(zeta) <= 1.0 / delta
                and abs(zeta - 1.0) >= delta)
    if region.kind == "internal_annulus":
        return z4 / delta < az < delta
    raise DomainError(f"unknown region kind {region.kind!r}")


# ---------------------------------------------------------------------------
# canonical frame


def canonical_shift(s: Scenario) -> int:
    """Cyclic relabel bringing the configuration to the canonical pattern."""
    if s.k == 3:
        for shift in range(3):
            if classify(s.rotated(shift)).table_row == "a2<a1<a3":
                return shift
        raise DegenerateError("no cyclic relabel yields the canonical triangle pattern")
    for shift in range(4):
        r = s.rotated(shift)
        c = classify(r)
        if (c.kind == "ConvexQuad" and c.sign_p31_p42 is not None
                and c.sign_p31_p42 > 0 and r.slope(3) > r.slope(1)):
            return shift
    raise DegenerateError(
        "no cyclic relabel yields the canonical quadrilateral pattern "
        "(tree type A or non-generic input)")


def _curve_values(curve: EdgeCurve, t: np.ndarray) -> np.ndarray:
    if curve.kind == "exponential":
        return curve.coeff * np.exp(-curve.rate * t) + curve.offset
    if curve.kind == "linear":
        return curve.coeff * t + curve.offset
    return np.full_like(np.asarray(t, dtype=float), curve.offset)


@dataclass
class EpsContext:
    """Everything needed to measure one (scenario, eps) pair in canonical frame."""

    scenario: Scenario
    classification: Classification
    tree: GradientTree
    alphas: tuple[float, ...]
    x: tuple[complex, ...]
    p: tuple[float, ...]
    p0: float
    p0p: Optional[float]
    p13: Optional[float]
    x13c: Optional[complex]
    z4sol: Optional[Z4Solution]
    disk: DiskMap

    @property
    def eps(self) -> float:
        return self.scenario.epsilon

    @property
    def delta(self) -> float:
        return self.scenario.delta

    @property
    def z4(self) -> Optional[float]:
        return None if self.z4sol is None else self.z4sol.z4


def build_context(s: Scenario, c: Optional[Classification] = None) -> EpsContext:
    """Prepare a canonical-frame scenario at its own epsilon (no shifting here;
    callers shift first via canonical_shift)."""
    if c is None:
        c = classify(s)
    if not c.is_polygon:
        raise DegenerateError(f"unclassified configuration: {c.table_row}")
    tree = build_gradient_tree(s, c)
    alphas = tuple(interior_angles(s))
    xs = tuple(intersections(s))
    ps = criticals(s).p
    if s.k == 3:
        p0 = tree.junctions[0]
        return EpsContext(s, c, tree, alphas, xs, ps, p0, None, None, None, None,
                          DiskMap(s))
    if c.tree_type == "A":
        raise DegenerateError("treetype-A configurations are outside the verified family")
    sol = solve_z4(s, c, via_reflection=False)
    if sol.z4 <= 0.0:
        raise DegenerateError(
            f"accessory parameter underflows (log z4 = {sol.log_z4:.1f}); "
            "the internal edge is too long for this epsilon in double precision")
    if 1.0 - sol.z4 <= s.delta:
        raise DegenerateError(
            f"delta={s.delta} too large at epsilon={s.epsilon}: the accessory "
            f"prevertex z4={sol.z4:.4f} enters the unit-prevertex disk")
    p0 = tree.junction_of_edge(1)
    p0p = tree.junction_of_edge(3)
    p13 = pair_critical(s, 1, 3)
    return EpsContext(s, c, tree, alphas, xs, ps, p0, p0p, p13, x13(s), sol,
                      DiskMap(s, z4=sol.z4))


# ---------------------------------------------------------------------------
# grids and measured sup errors


def _strip_grid(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    n, m = grid.tau_samples, grid.sigma_samples
    taus = np.concatenate(([0.0], -np.logspace(-3, math.log10(-TAU_MIN), n - 1)))
    sigmas = np.linspace(0.0, 1.0, m)
    tt, ss = np.meshgrid(taus, sigmas, indexing="ij")
    return tt.ravel(), ss.ravel()


def _polar_radii(delta: float, grid: GridSpec, half: Optional[str]) -> np.ndarray:
    n = grid.polar_samples
    v = np.linspace(-1.0, 1.0, n)
    u = np.sign(v) * (_POLAR_GAP + np.abs(v) * (1.0 - _POLAR_GAP))
    r = delta ** u
    if half == "inner":
        return r[r <= 1.0]
    if half == "outer":
        return r[r >= 1.0]
    return r


def _sup_on_points(ctx: EpsContext, zs: np.ndarray, targets: np.ndarray) -> float:
    if zs.size == 0:
        return 0.0
    vals = ctx.disk.eval_grid(zs)
    return float(np.max(np.abs(vals - targets)))


def _region_sup(ctx: EpsContext, region: RegionSpec, grid: GridSpec) -> tuple[float, int]:
    delta = ctx.delta
    if region.kind == "disk":
        tau, sigma = _strip_grid(grid)
        vals = ctx.disk.eval_strip(region.index, tau, sigma, delta)
        targets = _curve_values(ctx.tree.external[region.index - 1], ctx.eps * tau)
        return float(np.max(np.abs(vals - targets))), tau.size

    if region.kind in ("complement", "rescaled_complement"):
        radii = _polar_radii(delta, grid, region.part)
        thetas = np.linspace(0.0, math.pi, grid.sigma_samples)
        rr, th = np.meshgrid(radii, thetas, indexing="ij")
        zeta = rr * np.exp(1j * th)
        keep = np.abs(zeta - 1.0) >= delta
        zeta = zeta[keep]
        if region.kind == "complement":
            target = complex(ctx.p0)
            zs = zeta
        else:
            target = complex(ctx.p0p)
            zs = zeta * ctx.z4
        return _sup_on_points(ctx, zs, np.full(zs.shape, target)), zs.size

    if region.kind == "internal_annulus":
        if ctx.z4 is None or not (ctx.z4 < delta * delta):
            raise RangeError("internal annulus requires z4 < delta^2")
        t1, t2 = internal_window(delta, ctx.z4)
        taus = np.linspace(t1, t2, grid.tau_samples)
        sigmas = np.linspace(0.0, 1.0, grid.sigma_samples)
        tt, ss = np.meshgrid(taus, sigmas, indexing="ij")
        zs = phi_int(tt.ravel(), ss.ravel())
        targets = _curve_values(ctx.tree.internal, ctx.eps * tt.ravel())
        return _sup_on_points(ctx, zs, targets.astype(complex)), zs.size

    raise DomainError(f"unknown region kind {region.kind!r}")


def sup_error(s: Scenario, region: RegionSpec, grid: GridSpec = GridSpec()) -> float:
    """Measured grid sup of |w_eps - target| over one region (canonical frame)."""
    return _region_sup(build_context(s), region, grid)[0]


# ---------------------------------------------------------------------------
# analytic bounds


def _hsup(w0: float, r: float, sp: float) -> float:
    """sup over tau <= 0 of |w0 e^{r tau} - e^{sp tau}| for rates r, sp > 0."""
    best = abs(w0 - 1.0)
    if r != sp:
        arg = sp / (r * w0)
        if arg > 0.0:
            tstar = math.log(arg) / (r - sp)
            if tstar < 0.0:
                best = max(best, abs(w0 * math.exp(r * tstar) - math.exp(sp * tstar)))
    return best


def _phase_gap(delta_pow: float, angle: float) -> float:
    """|delta^a e^{i pi a} - 1| for the worst strip phase."""
    return abs(delta_pow * complex(math.cos(math.pi * angle), math.sin(math.pi * angle)) - 1.0)


def _ext_bound(x_i: complex, p_i: float, K: complex, A: float, S: float,
               alpha: float, delta: float, rate: Optional[float]) -> float:
    dp = delta ** alpha
    out = abs(x_i - p_i) + abs(K - A) * dp * S + abs(A) * dp * (S - 1.0)
    if A != 0.0 and rate is not None:
        out += abs(A) * (dp * _phase_gap(1.0, alpha) + _hsup(dp, math.pi * alpha, rate))
    return out


def _delta_inner(delta: float) -> float:
    # exact minimum of |t e^{i theta} - 1| over radial segments [delta, 1]
    # whose endpoints clear the disk of radius delta around 1
    return delta * math.sqrt(1.0 - 0.25 * delta * delta)


def _k3_bounds(ctx: EpsContext) -> dict[str, float]:
    a1, a2, a3 = ctx.alphas
    x1, x2, x3 = ctx.x
    p = ctx.p
    d = ctx.delta
    p0 = ctx.p0
    tree = ctx.tree

    k_in = gamma_ratio((a3 + a1,), (a3 + 1.0, a1)) * (x1 - x3)
    f_in = gauss_2f1(a3, 1.0 - a1, a3 + 1.0, d)
    m1 = (abs(x3 + k_in - p0)
          + abs(k_in) * (d ** a3 * (f_in - 1.0) + _phase_gap(d ** a3, a3))
          + a3 * abs(k_in) * d ** (a3 - 1.0) * _delta_inner(d) ** (a1 - 1.0) * (1.0 - d))
    k_out = gamma_ratio((a1 + a2,), (a1, a2 + 1.0)) * (x1 - x2)
    f_out = gauss_2f1(a2, 1.0 - a1, a2 + 1.0, d)
    m2 = (abs(x2 - p0) + abs(k_out) * d ** a2 * f_out
          + a2 * abs(k_out) * d ** (a1 - 1.0) * (1.0 / d - 1.0))

    # external strips, one amplitude/prefactor pair per marked point
    rate = lambda i: (ctx.scenario.slope(i) - ctx.scenario.slope(i + 1)) * ctx.eps
    amp = lambda i: tree.junction_of_edge(i) - p[i - 1]
    b1 = _ext_bound(x1, p[0],
                    gamma_ratio((a1 + a3,), (a1 + 1.0, a3)) * (x3 - x1), amp(1),
                    gauss_2f1(a1, 1.0 - a3, a1 + 1.0, d), a1, d, rate(1))
    b2 = _ext_bound(x2, p[1],
                    gamma_ratio((1.0 - a3,), (2.0 - a3 - a1, a1)) * (x1 - x2), amp(2),
                    gauss_2f1(a2, 1.0 - a1, a2 + 1.0, d), a2, d, rate(2))
    b3 = _ext_bound(x3, p[2], k_in, amp(3), f_in, a3, d, rate(3))
    return {
        "ext_z1": b1, "ext_z2": b2, "ext_z3": b3,
        "complement": max(m1, m2), "complement_inner": m1, "complement_outer": m2,
    }


def _k4_bounds(ctx: EpsContext) -> dict[str, float]:
    a1, a2, a3, a4 = ctx.alphas
    x1, x2, x3, x4 = ctx.x
    p = ctx.p
    d = ctx.delta
    z4, u = ctx.z4, ctx.z4sol.log_z4
    p0, p0p, p13, x13c = ctx.p0, ctx.p0p, ctx.p13, ctx.x13c
    tree = ctx.tree
    c = a3 + a4 - 1.0

    f34 = gauss_2f1(a3, 1.0 - a1, a3 + a4, z4)
    f12 = gauss_2f1(a2, 1.0 - a4, a1 + a2, z4)
    chat = (complex(math.cos(math.pi * a4), -math.sin(math.pi * a4))
            * gamma_ratio((c,), (a3, a4)) * (x4 - x3) / f34)
    cp = chat * math.exp(-c * u)
    maxfac = abs(c) * max(1.0 / (a3 + a4), 1.0 / (2.0 - a3 - a4))

    def g2sup(xc: float, yc: float, diag: float) -> float:
        off = appell_f1(1.0, 1.0 - a4, 1.0 - a1, 1.0, xc, yc) \
            - gauss_2f1(1.0 - a4, 1.0 - a1, 1.0, xc * yc)
        return maxfac * off + gauss_2f1(1.0 - a4, 1.0 - a1, 1.0, diag) - 1.0

    bounds: dict[str, float] = {}

    # complement, |z| <= 1 half (annulus-clause head plus radial tail)
    if z4 < d:
        m01 = abs(x13c - cp - p0)
        m03 = g2sup(z4 / d, d, z4)
        m04 = math.exp(-c * u) * abs(x4 - x3) / f34 * gamma_ratio((a3 + a4,), (a3, a4))
        tail_in = m04 * d ** (a3 - 1.0) * (d - z4) ** (a4 - 1.0) \
            * _delta_inner(d) ** (a1 - 1.0) * (1.0 - d)
        m05 = m01 + abs(cp) * (_phase_gap(d ** c, c) + d ** c * m03) + tail_in
    else:
        m05 = math.inf
    # complement, |z| >= 1 half (far-side head plus radial tail)
    k7c = gamma_ratio((a1 + a2,), (a1, a2 + 1.0)) * (x1 - x2) / f12
    m06 = abs(x2 - p0 + k7c)
    f1out = appell_f1(a2, 1.0 - a4, 1.0 - a1, a2 + 1.0, d * z4, d)
    m08 = (m06 + abs(k7c) * (_phase_gap(d ** a2, a2) + d ** a2 * (f1out - 1.0))
           + abs(k7c) * a2 * (1.0 - z4) ** (a4 - 1.0) * d ** (a1 - 1.0) * (1.0 / d - 1.0))
    bounds["complement_inner"] = m05
    bounds["complement_outer"] = m08
    bounds["complement"] = max(m05, m08)

    # rescaled complement halves
    k3r = gamma_ratio((a3 + a4,), (a3 + 1.0, a4)) * (x4 - x3) / f34
    f1r = appell_f1(a3, 1.0 - a4, 1.0 - a1, a3 + 1.0, d, d * z4)
    beta34 = math.exp(math.lgamma(a3) + math.lgamma(a4) - math.lgamma(a3 + a4))
    tb = abs(x4 - x3) / (beta34 * f34)
    m0r_in = (abs(x3 + k3r - p0p)
              + abs(k3r) * (d ** a3 * (f1r - 1.0) + _phase_gap(d ** a3, a3))
              + tb * (1.0 - z4) ** (a1 - 1.0) * d ** (a3 - 1.0)
              * _delta_inner(d) ** (a4 - 1.0) * (1.0 - d))
    if z4 < d:
        m0r_out = (abs(x13c - chat - p0p) + abs(chat) * _phase_gap(d ** (-c), c)
                   + abs(chat) * d ** (-c) * g2sup(d, z4 / d, z4)
                   + tb * (1.0 - z4 / d) ** (a1 - 1.0) * d ** (a4 - 1.0) * (1.0 / d - 1.0))
    else:
        m0r_out = math.inf
    bounds["rescaled_complement_inner"] = m0r_in
    bounds["rescaled_complement_outer"] = m0r_out
    bounds["rescaled_complement"] = max(m0r_in, m0r_out)

    # internal annulus (windowed)
    if z4 < d * d:
        mint1 = abs(x13c - p13)
        mint3 = g2sup(d, d, z4)
        mint4 = abs(cp - (p13 - p0))
        r_ang = math.pi * c
        sp = (ctx.scenario.slope(3) - ctx.scenario.slope(1)) * ctx.eps
        if r_ang == sp:
            mint5 = 0.0
        else:
            tstar = math.log(r_ang / sp) / (r_ang - sp)
            mint5 = abs(math.exp(-r_ang * tstar) - math.exp(-sp * tstar))
        bounds["internal_annulus"] = (mint1 + abs(cp) * d ** c * mint3 + mint4 * d ** c
                                      + abs(p0 - p13) * (d ** c * _phase_gap(1.0, c) + mint5))
    else:
        bounds["internal_annulus"] = math.inf

    # external strips
    rate = lambda i: (ctx.scenario.slope(i) - ctx.scenario.slope(i + 1)) * ctx.eps
    amp = lambda i: tree.junction_of_edge(i) - p[i - 1]
    k1 = gamma_ratio((a4 + a1,), (a4, a1 + 1.0)) * (x4 - x1) \
        / gauss_2f1_complement(a1, 1.0 - a3, a4 + a1, z4) / (1.0 - z4) ** a1
    s1 = appell_f1(a1, 1.0 - a3, 1.0 - a4, a1 + 1.0, d, d / (1.0 - z4))
    bounds["ext_z1"] = _ext_bound(x1, p[0], k1, amp(1), s1, a1, d, rate(1))
    bounds["ext_z2"] = _ext_bound(x2, p[1], k7c, amp(2), f1out, a2, d, rate(2))
    s3 = f1r
    bounds["ext_z3"] = _ext_bound(x3, p[2], k3r, amp(3), s3, a3, d, rate(3))
    arg4 = -z4 / (1.0 - z4)
    k4 = gamma_ratio((a3 + a4,), (a3, a4 + 1.0)) * (x3 - x4) \
        / gauss_2f1(a4, 1.0 - a1, a3 + a4, arg4,
                    method="auto" if arg4 > -1.0 else "integral")
    s4 = appell_f1(a4, 1.0 - a3, 1.0 - a1, a4 + 1.0, d, d * z4 / (1.0 - z4))
    bounds["ext_z4"] = _ext_bound(x4, p[3], k4, amp(4), s4, a4, d, rate(4))
    return bounds


def analytic_bounds(s: Scenario, region: RegionSpec,
                    ctx: Optional[EpsContext] = None) -> float:
    """Closed-form bound for the region's sup error (canonical frame)."""
    if ctx is None:
        ctx = build_context(s)
    table = _k3_bounds(ctx) if ctx.scenario.k == 3 else _k4_bounds(ctx)
    return table[region.name()]


# ---------------------------------------------------------------------------
# report assembly


@dataclass(frozen=True)
class ReportRow:
    region: str
    epsilon: float
    sup_error: float
    bound: Optional[float]
    z4: Optional[float]
    l_estimate: Optional[float]
    windowed: bool
    points: int


@dataclass
class ConvergenceReport:
    k: int
    classification: str
    tree_type: str
    internal_length: float
    canonical_shift: int
    delta: float
    grid: GridSpec
    rows: list[ReportRow] = field(default_factory=list)
    versions: dict = field(default_factory=dict)

    def rows_for(self, region: str) -> list[ReportRow]:
        return [r for r in self.rows if r.region == region]


def _versions() -> dict:
    import numpy
    import scipy

    return {"disktree": __version__, "numpy": numpy.__version__,
            "scipy": scipy.__version__, "python": platform.python_version()}


def run_report(s: Scenario, eps_schedule=(0.2, 0.1, 0.05, 0.025),
               grid: GridSpec = GridSpec(), regions: Optional[list[str]] = None) -> ConvergenceReport:
    """Classification -> tree -> per-eps accessory solve -> region sups and bounds."""
    shift = canonical_shift(s)
    s_canon = s.rotated(shift)
    c = classify(s_canon)
    length = internal_edge_length(s_canon, c) if s_canon.k == 4 else 0.0
    report = ConvergenceReport(
        k=s.k, classification=c.table_row, tree_type=c.tree_type or "",
        internal_length=length, canonical_shift=shift, delta=s.delta, grid=grid,
        versions=_versions())
    for eps in eps_schedule:
        ctx = build_context(s_canon.with_epsilon(eps), c)
        bounds = _k3_bounds(ctx) if s.k == 3 else _k4_bounds(ctx)
        z4 = ctx.z4
        lest = None if z4 is None else -eps * ctx.z4sol.log_z4 / math.pi
        for region in region_list(s.k):
            name = region.name()
            if regions is not None and name not in regions:
                continue
            windowed = region.kind == "internal_annulus"
            if windowed and (z4 is None or not (z4 < s.delta ** 2)):
                continue  # annulus only exists once z4 < delta^2
            sup, npts = _region_sup(ctx, region, grid)
            bound = bounds.get(name)
            if bound is not None and math.isinf(bound):
                bound = None
            report.rows.append(ReportRow(
                region=name, epsilon=eps, sup_error=sup, bound=bound, z4=z4,
                l_estimate=lest, windowed=windowed, points=npts))
    return report
