"""Accessory parameter z4 of the four-marked-point disk map, plus the
Rengel modulus brackets used to pin its boundary limits.

The defining equation matches the side-length ratio |x1 - x2| / |x3 - x4| of
the scaled quadrilateral against its hypergeometric expression in z4; the
root is found in u = log z4 because the residual is near-affine there and z4
itself underflows long before u does (u ~ -pi l / eps as eps -> 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import roots_jacobi

from .errors import DegenerateError, NoBracket, NoConvergence, ParallelSidesError
from .geometry import Classification, Scenario, classify, interior_angles, intersections
from .gradtree import internal_edge_length
from .specfun import gauss_2f1

_RES_TOL = 1e-12
_MAX_ITER = 200


@dataclass(frozen=True)
class Z4Solution:
    z4: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    log_z4: float
    one_minus_z4: float
    log_one_minus_z4: float
    log_z4_quad: float  # root of the independent quadrature residual


@dataclass(frozen=True)
class ModulusBracket:
    lower: float
    upper: float
    area: float
    s_a: float
    s_b: float


def _lg(x: float) -> float:
    return math.lgamma(x)


def _log_side_ratio_series(alphas, u: float) -> float:
    """log of the hypergeometric side-ratio expression at z4 = e^u."""
    a1, a2, a3, a4 = alphas
    z4 = math.exp(u)  # may underflow to 0.0; the series then returns 1
    f12 = gauss_2f1(a2, 1.0 - a4, a1 + a2, z4)
    f34 = gauss_2f1(a3, 1.0 - a1, a3 + a4, z4)
    gammas = _lg(a1) + _lg(a2) - _lg(a1 + a2) + _lg(a3 + a4) - _lg(a3) - _lg(a4)
    return gammas - (a3 + a4 - 1.0) * u + math.log(f12) - math.log(f34)


def _log_side_ratio_quad(alphas, u: float) -> float:
    """Same quantity via Gauss-Jacobi quadrature of the two boundary-side
    integrals of the defining map (independent of the series route)."""
    a1, a2, a3, a4 = alphas
    z4 = math.exp(u)

    def beta_integral(el: float, er: float, smooth_exp: float) -> float:
        prev = None
        for n in (32, 64, 128):
            x, w = roots_jacobi(n, er, el)
            t = 0.5 * (x + 1.0)
            val = float(np.sum((2.0 ** (-(el + er + 1.0))) * w
                               * np.power(1.0 - z4 * t, smooth_exp)))
            if prev is not None and abs(val - prev) <= 1e-13 * abs(val):
                return val
            prev = val
        return prev

    i12 = beta_integral(a2 - 1.0, a1 - 1.0, a4 - 1.0)
    i34 = beta_integral(a3 - 1.0, a4 - 1.0, a1 - 1.0)
    return math.log(i12) - math.log(i34) - (a3 + a4 - 1.0) * u


def _scenario_ratio_target(s: Scenario) -> float:
    x = intersections(s)
    num, den = abs(x[0] - x[1]), abs(x[2] - x[3])
    if num == 0.0 or den == 0.0:
        raise DegenerateError("degenerate side lengths")
    return math.log(num) - math.log(den)


def _require_quad(s: Scenario, c: Optional[Classification]) -> Classification:
    if c is None:
        c = classify(s)
    if c.kind != "ConvexQuad":
        raise DegenerateError(f"accessory parameter needs a convex quadrilateral, got {c.kind}")
    if s.slope(1) == s.slope(3) or s.slope(2) == s.slope(4):
        raise ParallelSidesError("parallel opposite sides: accessory equation degenerates")
    return c


def side_ratio_residual(s: Scenario, z4_candidate: float,
                        c: Optional[Classification] = None) -> float:
    """log(series expression at z4) - log(scaled side-length ratio)."""
    _require_quad(s, c)
    if not (0.0 < z4_candidate < 1.0):
        raise DegenerateError("z4 candidate must lie in (0, 1)")
    alphas = tuple(interior_angles(s))
    return _log_side_ratio_series(alphas, math.log(z4_candidate)) - _scenario_ratio_target(s)


def _bisect_secant(f, lo: float, hi: float, flo: float, fhi: float):
    """Hybrid root refinement on a sign-changing bracket in u-space.

    Returns the root, its residual, the iteration count, and the initial
    bracket (which contains the root strictly)."""
    lo0, hi0 = lo, hi
    it = 0
    u, fu = lo, flo
    while it < _MAX_ITER:
        it += 1
        # secant proposal, guarded into the open bracket
        if fhi != flo:
            cand = (lo * fhi - hi * flo) / (fhi - flo)
        else:
            cand = 0.5 * (lo + hi)
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        fc = f(cand)
        if flo * fc <= 0.0:
            hi, fhi = cand, fc
        else:
            lo, flo = cand, fc
        u, fu = cand, fc
        if abs(fu) < _RES_TOL or (hi - lo) < 1e-14 * (1.0 + abs(u)):
            if abs(fu) > 1e-8:
                # interval collapsed without the residual vanishing: the root
                # is unresolvable in this parameterization (z4 pinned at a
                # representability wall; the reflected solve handles it)
                raise NoConvergence(
                    f"residual {fu:.3e} did not vanish at the collapsed bracket")
            return u, fu, it, (lo0, hi0)
    raise NoConvergence("accessory-parameter iteration exceeded budget")


def _solve_log(f, eps: float, length: float):
    lo = -math.pi * (length + 2.0) / eps
    hi = min(math.log(0.5), -math.pi * max(length - 2.0, 0.0) / eps)
    if hi <= lo:
        hi = 0.5 * lo
    flo, fhi = f(lo), f(hi)
    tries = 0
    while flo * fhi > 0.0:
        tries += 1
        if tries > 80:
            raise NoBracket("side-ratio residual has equal signs on the widened bracket")
        lo, flo = lo - max(2.0 * math.pi / eps, 5.0), None
        flo = f(lo)
        if flo * fhi <= 0.0:
            break
        hi = 0.5 * hi  # push z4 = e^hi toward 1
        fhi = f(hi)
    return _bisect_secant(f, lo, hi, flo, fhi)


def solve_z4(s: Scenario, c: Optional[Classification] = None,
             via_reflection: Optional[bool] = None) -> Z4Solution:
    """Solve the side-ratio equation for z4 in (0, 1).

    Scenarios with (p3-p1)(p4-p2) < 0 push z4 toward 1, where 1 - z4
    underflows long before z4 stops resolving; they are therefore solved by
    default through the cyclic relabel L'_i = L_{i+1}, whose accessory
    parameter is exactly 1 - z4.  Pass ``via_reflection=False`` to force the
    direct solve (fine at moderate eps; used to test the equivalence).
    """
    c = _require_quad(s, c)
    if via_reflection is None:
        via_reflection = (c.sign_p31_p42 is not None and c.sign_p31_p42 < 0)
    if via_reflection:
        r = solve_z4(s.rotated(1), via_reflection=False)
        return Z4Solution(
            z4=1.0 - r.z4, residual=r.residual, iterations=r.iterations,
            bracket=(1.0 - r.bracket[1], 1.0 - r.bracket[0]),
            log_z4=math.log1p(-r.z4), one_minus_z4=r.z4,
            log_one_minus_z4=r.log_z4, log_z4_quad=math.log1p(-math.exp(r.log_z4_quad)))

    alphas = tuple(interior_angles(s))
    target = _scenario_ratio_target(s)
    length = internal_edge_length(s, c)

    def fser(u: float) -> float:
        return _log_side_ratio_series(alphas, u) - target

    u, fu, it, (blo, bhi) = _solve_log(fser, s.epsilon, length)

    # independent cross-validation: root of the quadrature-side residual
    def fquad(v: float) -> float:
        return _log_side_ratio_quad(alphas, v) - target

    for k in range(60):
        w = max(1e-6, 1e-6 * abs(u)) * 4.0 ** k
        qlo = u - w
        # keep the upper end strictly below 0 (z4 < 1), closing in on 1
        qhi = u + w if u + w < 0.0 else u / 2.0 ** (k + 1)
        if fquad(qlo) * fquad(qhi) <= 0.0:
            break
    else:
        raise NoBracket("quadrature residual root not bracketed near series root")
    uq = _bisect_secant(fquad, qlo, qhi, fquad(qlo), fquad(qhi))[0]
    if abs(uq - u) > 1e-8 * (1.0 + abs(u)):
        raise NoConvergence(
            f"series root log z4={u} and quadrature root {uq} disagree beyond tolerance")

    z4 = math.exp(u)
    return Z4Solution(z4=z4, residual=fu, iterations=it,
                      bracket=(math.exp(blo), math.exp(bhi)),
                      log_z4=u, one_minus_z4=-math.expm1(u) if u > -230 else 1.0,
                      log_one_minus_z4=math.log(-math.expm1(u)) if u > -230 else 0.0,
                      log_z4_quad=uq)


def z4_asymptotic(s: Scenario, eps_schedule) -> list[tuple[float, float]]:
    """Pairs (eps, -eps log z4 / pi), using log(1 - z4) on the reflected side;
    the values approach the internal edge length as eps -> 0."""
    c = _require_quad(s, None)
    out = []
    for eps in eps_schedule:
        sol = solve_z4(s.with_epsilon(eps), None)
        if c.sign_p31_p42 is not None and c.sign_p31_p42 < 0:
            val = -eps * sol.log_one_minus_z4 / math.pi
        else:
            val = -eps * sol.log_z4 / math.pi
        out.append((eps, val))
    return out


# ---------------------------------------------------------------------------
# Rengel modulus brackets


def _seg_dist(a: complex, b: complex, c: complex, d: complex) -> float:
    """Distance between segments [a,b] and [c,d] (assumed non-crossing)."""

    def point_seg(p, u, v):
        d0 = v - u
        den = abs(d0) ** 2
        if den == 0.0:
            return abs(p - u)
        t = min(1.0, max(0.0, ((p - u).real * d0.real + (p - u).imag * d0.imag) / den))
        return abs(p - (u + t * d0))

    return min(point_seg(a, c, d), point_seg(b, c, d), point_seg(c, a, b), point_seg(d, a, b))


def rengel_bracket(quad) -> ModulusBracket:
    """Two-sided modulus bracket of a convex quadrilateral from area and
    side-to-side distances; equality of the two bounds characterizes
    rectangles."""
    z = [complex(q) if not isinstance(q, tuple) else complex(*q) for q in quad]
    if len(z) != 4:
        raise DegenerateError("need exactly four vertices")
    area = 0.0
    for i in range(4):
        a, b = z[i], z[(i + 1) % 4]
        area += a.real * b.imag - a.imag * b.real
    area *= 0.5
    if area <= 0.0 or not math.isfinite(area):
        raise DegenerateError("vertices must be counterclockwise with positive area")
    for i in range(4):
        u = z[(i + 1) % 4] - z[i]
        v = z[(i + 2) % 4] - z[(i + 1) % 4]
        if u.real * v.imag - u.imag * v.real <= 0.0:
            raise DegenerateError("quadrilateral is not strictly convex")
    s_a = _seg_dist(z[0], z[1], z[2], z[3])
    s_b = _seg_dist(z[1], z[2], z[3], z[0])
    if s_a == 0.0 or s_b == 0.0:
        raise DegenerateError("opposite sides touch")
    return ModulusBracket(lower=s_a * s_a / area, upper=area / (s_b * s_b),
                          area=area, s_a=s_a, s_b=s_b)
