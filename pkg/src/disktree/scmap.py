"""Schwarz-Christoffel disk maps on the closed upper half plane.

Two independent evaluation routes are kept side by side:

* hypergeometric series clauses, one per neighbourhood of a prevertex plus an
  annulus clause built from Horn's G2 through the connection formula, and
* direct adaptive Gauss-Jacobi quadrature of the defining integral, which
  serves as the oracle the series clauses are tested against.

Branches: every factor (zeta - z_k)^(alpha_k - 1) is real positive for real
zeta > z_k and carries the phase e^{i pi (alpha_k - 1)} for real zeta < z_k,
i.e. the principal branch continued from the upper half plane.  Powers of
1 - z for z in the closed upper half plane live on the lower-half-plane
branch (argument in [-pi, 0]).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DegenerateError, DomainError, ParallelSidesError, QuadratureError
from .geometry import Scenario, interior_angles, intersections
from .specfun import (DEFAULT_CONTROL, SeriesControl, appell_f1, gamma_ratio,
                      gauss_2f1, gauss_2f1_complement, horn_g2)

__all__ = [
    "SCSpec",
    "REGION_TAGS",
    "sc_quadrature",
    "triangle_map",
    "quad_map",
    "quad_map_rescaled",
    "x13",
    "DiskMap",
    "build_disk_map",
]

# Region tags for the quadrilateral evaluator; "quadrature_only" marks points
# on the convergence circles where no series applies.
REGION_TAGS = ("near_zero", "near_xi", "near_one", "near_infinity", "annulus",
               "quadrature_only")

_SERIES_MARGIN = 1e-9
_ANGLE_SUM_TOL = 1e-12


def _upow(w, a: float):
    """w^a continued from the upper half plane (principal branch)."""
    if isinstance(w, np.ndarray):
        return np.power(w.astype(complex), a)
    return complex(w) ** a


def _lpow(w, a: float):
    """w^a continued from the lower half plane: arg w in [-pi, 0]."""
    if isinstance(w, np.ndarray):
        w = w.astype(complex)
        out = np.power(w, a)
        neg = (w.imag == 0.0) & (w.real < 0.0)
        if np.any(neg):
            out[neg] = np.exp(a * (np.log(np.abs(w[neg])) - 1j * math.pi))
        return out
    wc = complex(w)
    if wc.imag == 0.0 and wc.real < 0.0:
        return cmath.exp(a * complex(math.log(abs(wc)), -math.pi))
    return wc ** a


def _line_intersection(p: complex, q: complex, r: complex, s: complex) -> complex:
    """Intersection of line p-q with line r-s."""
    d1, d2 = q - p, s - r
    den = d1.real * d2.imag - d1.imag * d2.real
    if den == 0.0:
        raise DegenerateError("lines are parallel")
    w = r - p
    t = (w.real * d2.imag - w.imag * d2.real) / den
    return p + t * d1


@dataclass(frozen=True)
class SCSpec:
    """Data of a Schwarz-Christoffel map in canonical labelling.

    ``prevertices`` are the finite prevertices in increasing order; the last
    vertex sits at infinity.  ``exponents`` are the interior angles divided
    by pi for all vertices (infinity last) and must sum to k - 2;
    ``images`` are the vertex images with the image of infinity last.
    """

    prevertices: tuple[float, ...]
    exponents: tuple[float, ...]
    images: tuple[complex, ...]

    def __post_init__(self):
        n = len(self.exponents)
        if len(self.prevertices) != n - 1 or len(self.images) != n:
            raise DegenerateError("inconsistent SC data lengths")
        if any(u >= v for u, v in zip(self.prevertices, self.prevertices[1:])):
            raise DegenerateError("prevertices must be strictly increasing")
        if abs(sum(self.exponents) - (n - 2)) > _ANGLE_SUM_TOL * n:
            raise DegenerateError("exponents must sum to k - 2")
        if any(not (0.0 < a < 1.0) for a in self.exponents):
            raise DegenerateError("exponents must lie in (0, 1)")


# ---------------------------------------------------------------------------
# quadrature route


def _dist_point_segment(p: complex, a: complex, b: complex) -> float:
    d = b - a
    denom = abs(d) ** 2
    if denom == 0.0:
        return abs(p - a)
    t = ((p - a).real * d.real + (p - a).imag * d.imag) / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


@lru_cache(maxsize=512)
def _jacobi01(n: int, exp_left: float, exp_right: float):
    from scipy.special import roots_jacobi

    x, w = roots_jacobi(n, exp_right, exp_left)
    return 0.5 * (x + 1.0), (2.0 ** (-(exp_left + exp_right + 1.0))) * w


def _smooth_factors(spec: SCSpec, zeta: np.ndarray, skip: tuple[int, ...]) -> np.ndarray:
    out = np.ones_like(zeta)
    for k, pv in enumerate(spec.prevertices):
        if k in skip:
            continue
        out = out * np.power(zeta - pv, spec.exponents[k] - 1.0)
    return out


def _segment_integral(spec: SCSpec, a: complex, b: complex,
                      sing_a: Optional[int], sing_b: Optional[int],
                      tol: float, depth: int = 0) -> complex:
    if a == b:
        return 0.0j
    if depth > 60:
        raise QuadratureError("segment subdivision did not terminate")
    length = abs(b - a)
    skip = tuple(k for k in (sing_a, sing_b) if k is not None)
    others = [pv for k, pv in enumerate(spec.prevertices) if k not in skip]
    if others:
        dmin = min(_dist_point_segment(complex(p), a, b) for p in others)
        # one-half rule: other singularities must stay clear of the segment
        if dmin < 0.5 * length:
            m = 0.5 * (a + b)
            return (_segment_integral(spec, a, m, sing_a, None, tol, depth + 1)
                    + _segment_integral(spec, m, b, None, sing_b, tol, depth + 1))
    ea = spec.exponents[sing_a] - 1.0 if sing_a is not None else 0.0
    eb = spec.exponents[sing_b] - 1.0 if sing_b is not None else 0.0
    pref = (b - a) * _upow(b - a, ea) * _upow(a - b, eb)
    prev = None
    for n in (24, 48, 96):
        t, w = _jacobi01(n, ea, eb)
        zeta = a + (b - a) * t
        q = pref * np.sum(w * _smooth_factors(spec, zeta, skip))
        if prev is not None and abs(q - prev) <= tol * (1.0 + abs(q)):
            return complex(q)
        prev = q
    m = 0.5 * (a + b)
    return (_segment_integral(spec, a, m, sing_a, None, tol, depth + 1)
            + _segment_integral(spec, m, b, None, sing_b, tol, depth + 1))


@lru_cache(maxsize=256)
def _sc_scale_constant(spec: SCSpec) -> complex:
    """Multiplicative constant B with w(z) = image_j + B int_{pv_j}^z ..."""
    q = _segment_integral(spec, complex(spec.prevertices[0]), complex(spec.prevertices[1]),
                          0, 1, 1e-13)
    if q == 0.0:
        raise QuadratureError("degenerate normalization integral")
    return (spec.images[1] - spec.images[0]) / q


def sc_quadrature(spec: SCSpec, z: complex, tol: float = 1e-11) -> complex:
    """Evaluate the map at finite z in the closed upper half plane by
    integrating the defining product from the nearest prevertex."""
    zc = complex(z)
    if zc.imag < -1e-15:
        raise DomainError("sc_quadrature expects z in the closed upper half plane")
    dists = [abs(zc - pv) for pv in spec.prevertices]
    j = int(np.argmin(dists))
    if dists[j] == 0.0:
        return spec.images[j]
    b_const = _sc_scale_constant(spec)
    q = _segment_integral(spec, complex(spec.prevertices[j]), zc, j, None, tol)
    return spec.images[j] + b_const * q


# ---------------------------------------------------------------------------
# series route: triangle


def triangle_map(spec: SCSpec, z, ctl: SeriesControl = DEFAULT_CONTROL):
    """Series evaluation of a triangle map with prevertices 0, 1, infinity."""
    if len(spec.exponents) != 3 or spec.prevertices != (0.0, 1.0):
        raise DomainError("triangle_map expects prevertices (0, 1) and 3 vertices")
    zc = complex(z) if not isinstance(z, np.ndarray) else z
    ratios = {
        "near_zero": _absmax_arr(zc),
        "near_one": _absmax_arr(1.0 - zc),
        "near_infinity": _inv_absmin(zc),
    }
    tag = min(ratios, key=ratios.get)
    if ratios[tag] >= 1.0 - _SERIES_MARGIN:
        raise DomainError("no triangle series clause converges at this point")
    return _triangle_clause(spec, tag, zc, ctl)


def _absmax_arr(v) -> float:
    if isinstance(v, np.ndarray):
        return float(np.max(np.abs(v))) if v.size else 0.0
    return abs(v)


def _inv_absmin(v) -> float:
    if isinstance(v, np.ndarray):
        m = float(np.min(np.abs(v))) if v.size else math.inf
    else:
        m = abs(v)
    return math.inf if m == 0.0 else 1.0 / m


def _triangle_near_one_local(spec: SCSpec, v, ctl: SeriesControl):
    """Expansion at prevertex 1 in the local coordinate v = 1 - z, which
    stays representable when z is exponentially close to 1."""
    x1, x2, _ = spec.images
    a1, a2, _ = spec.exponents
    pref = gamma_ratio((a1 + a2,), (a2 + 1.0, a1)) * (x1 - x2)
    return x2 + pref * _lpow(v, a2) * gauss_2f1(a2, 1.0 - a1, a2 + 1.0, v, ctl)


def _triangle_clause(spec: SCSpec, tag: str, z, ctl: SeriesControl):
    x1, x2, x3 = spec.images
    a1, a2, a3 = spec.exponents
    if tag == "near_zero":
        pref = gamma_ratio((a1 + a2,), (a1 + 1.0, a2)) * (x2 - x1)
        return x1 + pref * _upow(z, a1) * gauss_2f1(a1, 1.0 - a2, a1 + 1.0, z, ctl)
    if tag == "near_one":
        return _triangle_near_one_local(spec, 1.0 - z, ctl)
    if tag == "near_infinity":
        pref = gamma_ratio((1.0 - a1,), (2.0 - a1 - a2, a2)) * (x2 - x3)
        return x3 + pref * _upow(z, a1 + a2 - 1.0) * gauss_2f1(
            1.0 - a1 - a2, 1.0 - a2, 2.0 - a1 - a2, 1.0 / z, ctl)
    raise DomainError(f"unknown triangle clause {tag!r}")


# ---------------------------------------------------------------------------
# series route: quadrilateral

def _check_generic_angles(exponents):
    k = len(exponents)
    for i in range(k):
        if abs(exponents[i] + exponents[(i + 1) % k] - 1.0) < 1e-9:
            raise ParallelSidesError(
                "adjacent angles sum to pi: a pair of sides is parallel")


def canonical_x13(spec: SCSpec) -> complex:
    """Intersection of the lines through (x4, x1) and (x2, x3)."""
    x1, x2, x3, x4 = spec.images
    return _line_intersection(x4, x1, x2, x3)


def _quad_near_zero_local(images, exponents, xi: float, zeta, ctl: SeriesControl):
    """Expansion at 0 in the rescaled coordinate zeta = z / xi."""
    x1, x2 = images[0], images[1]
    a1, a2, a3, _ = exponents
    f_xi = gauss_2f1(a1, 1.0 - a3, a1 + a2, xi, ctl)
    pref = gamma_ratio((a1 + a2,), (a1 + 1.0, a2)) * (x2 - x1) / f_xi
    return x1 + pref * _upow(zeta, a1) * appell_f1(
        a1, 1.0 - a2, 1.0 - a3, a1 + 1.0, zeta, xi * zeta, ctl)


def _quad_near_xi_local(images, exponents, xi: float, omega, ctl: SeriesControl):
    """Expansion at the accessory prevertex in omega = 1 - z / xi."""
    x1, x2 = images[0], images[1]
    a1, a2, a3, _ = exponents
    arg = -xi / (1.0 - xi)
    # beyond xi = 1/2 the normalization argument leaves the unit disk; the
    # Euler path covers it (c > b > 0 and the point is off the cut)
    f_loc = gauss_2f1(a2, 1.0 - a3, a1 + a2, arg, ctl,
                      method="auto" if arg > -1.0 else "integral")
    pref = gamma_ratio((a1 + a2,), (a1, a2 + 1.0)) * (x1 - x2) / f_loc
    return x2 + pref * _lpow(omega, a2) * appell_f1(
        a2, 1.0 - a1, 1.0 - a3, a2 + 1.0, omega, -omega * xi / (1.0 - xi), ctl)


def _quad_near_one_local(images, exponents, xi: float, v, ctl: SeriesControl):
    """Expansion at prevertex 1 in v = 1 - z.  The normalization carries
    Gamma(a3 + 1): the Beta factor of the local expansion is B(a3, a2),
    matching the Gamma(a1 + 1) of the 0-clause."""
    x2, x3 = images[1], images[2]
    a1, a2, a3, _ = exponents
    f_loc = gauss_2f1_complement(a3, 1.0 - a1, a2 + a3, xi, ctl)
    pref = gamma_ratio((a2 + a3,), (a2, a3 + 1.0)) * (x2 - x3) / f_loc / (1.0 - xi) ** a3
    return x3 + pref * _lpow(v, a3) * appell_f1(
        a3, 1.0 - a1, 1.0 - a2, a3 + 1.0, v, v / (1.0 - xi), ctl)


def _quad_clause(images, exponents, xi: float, tag: str, z, ctl: SeriesControl):
    """Shared clause formulas; ``xi`` is the accessory prevertex in (0, 1) of
    the canonical layout 0 < xi < 1 < infinity."""
    x1, x2, x3, x4 = images
    a1, a2, a3, a4 = exponents
    if tag == "near_zero":
        return _quad_near_zero_local(images, exponents, xi, z / xi, ctl)
    if tag == "near_xi":
        return _quad_near_xi_local(images, exponents, xi, 1.0 - z / xi, ctl)
    if tag == "near_one":
        return _quad_near_one_local(images, exponents, xi, 1.0 - z, ctl)
    if tag == "near_infinity":
        f_loc = gauss_2f1(2.0 - a1 - a2 - a3, 1.0 - a2, 2.0 - a1 - a2, xi, ctl)
        pref = gamma_ratio((2.0 - a1 - a2,), (3.0 - a1 - a2 - a3, a3)) * (x3 - x4) / f_loc
        return x4 + pref * _upow(z, a1 + a2 + a3 - 2.0) * appell_f1(
            2.0 - a1 - a2 - a3, 1.0 - a2, 1.0 - a3, 3.0 - a1 - a2 - a3, xi / z, 1.0 / z, ctl)
    if tag == "annulus":
        x13 = _line_intersection(x4, x1, x2, x3)
        c = a1 + a2 - 1.0
        f_xi = gauss_2f1(a1, 1.0 - a3, a1 + a2, xi, ctl)
        pref = cmath.exp(-1j * math.pi * a2) * gamma_ratio((a1 + a2 - 1.0,), (a1, a2)) \
            * (x2 - x1) / f_xi
        return x13 - pref * _upow(z / xi, c) * horn_g2(
            1.0 - a2, 1.0 - a3, c, -c, -xi / z, -z, ctl)
    raise DomainError(f"unknown quadrilateral clause {tag!r}")


def _quad_ratios(xi: float, z, tags=REGION_TAGS[:5]) -> dict[str, float]:
    az = _absmax_arr(z)
    az_min_inv = _inv_absmin(z)
    all_ratios = {
        "near_zero": az / xi,
        "near_xi": max(_absmax_arr(z / xi - 1.0), _absmax_arr(z - xi) / (1.0 - xi)),
        "near_one": _absmax_arr(1.0 - z) / (1.0 - xi),
        "near_infinity": az_min_inv,
        "annulus": max(xi * az_min_inv, az),
    }
    return {t: all_ratios[t] for t in tags}


def quad_map(spec: SCSpec, z, ctl: SeriesControl = DEFAULT_CONTROL, tag: Optional[str] = None):
    """Series evaluation for the canonical layout 0 < xi < 1 < infinity.

    The clause is auto-selected by convergence ratio unless ``tag`` names one
    of the REGION_TAGS explicitly.
    """
    if len(spec.exponents) != 4 or spec.prevertices[0] != 0.0 or spec.prevertices[2] != 1.0:
        raise DomainError("quad_map expects prevertices (0, xi, 1)")
    xi = spec.prevertices[1]
    if not (0.0 < xi < 1.0):
        raise DomainError("quad_map expects xi in (0, 1)")
    _check_generic_angles(spec.exponents)
    if tag is None:
        ratios = _quad_ratios(xi, z, ("near_zero", "near_one", "near_infinity", "annulus"))
        tag = min(ratios, key=ratios.get)
        if ratios[tag] >= 1.0 - _SERIES_MARGIN:
            raise DomainError("no quadrilateral series clause converges at this point")
    return _quad_clause(spec.images, spec.exponents, xi, tag, z, ctl)


def quad_map_rescaled(spec: SCSpec, z, ctl: SeriesControl = DEFAULT_CONTROL,
                      tag: Optional[str] = None):
    """Series evaluation for the rescaled layout 0 < 1 < xi' < infinity.

    Realizes w'(z) = w(z / xi') of the canonical map with accessory
    prevertex 1/xi'; clauses are shared with quad_map after that
    change of variable.
    """
    if len(spec.exponents) != 4 or spec.prevertices[0] != 0.0 or spec.prevertices[1] != 1.0:
        raise DomainError("quad_map_rescaled expects prevertices (0, 1, xi')")
    xip = spec.prevertices[2]
    if not (xip > 1.0):
        raise DomainError("quad_map_rescaled expects xi' > 1")
    _check_generic_angles(spec.exponents)
    xi = 1.0 / xip
    zs = z * xi  # back to canonical coordinate
    if tag is None:
        ratios = _quad_ratios(xi, zs, ("near_zero", "near_xi", "annulus"))
        tag = min(ratios, key=ratios.get)
        if ratios[tag] >= 1.0 - _SERIES_MARGIN:
            raise DomainError("no rescaled series clause converges at this point")
    return _quad_clause(spec.images, spec.exponents, xi, tag, zs, ctl)


def x13(s: Scenario) -> complex:
    """Intersection of the scaled lines 1 and 3 of a four-line scenario."""
    if s.k != 4:
        raise DegenerateError("x13 requires four lines")
    a1, b1 = s.slope(1), s.intercept(1)
    a3, b3 = s.slope(3), s.intercept(3)
    if a1 == a3:
        raise DegenerateError("lines 1 and 3 are parallel")
    p = -(b3 - b1) / (a3 - a1)
    return complex(p, s.epsilon * (a1 * p + b1))


# ---------------------------------------------------------------------------
# scenario-convention evaluator


class DiskMap:
    """Disk map in scenario labelling: w(1) = x1, w(inf) = x2, w(0) = x3 and,
    for four lines, w(z4) = x4 with z4 in (0, 1).

    Series clauses are canonical-labelled (vertex j of the clause formulas is
    scenario vertex j+2 cyclically); this class owns that relabelling and
    presents scenario-order data only.
    """

    def __init__(self, scenario: Scenario, z4: Optional[float] = None):
        self.scenario = scenario
        self.k = scenario.k
        self.vertices = intersections(scenario)  # scenario order x1..xk
        self.alphas = interior_angles(scenario)
        self.z4 = z4
        k = self.k
        canon_images = tuple(self.vertices[(j + 2) % k] for j in range(k))
        canon_alphas = tuple(self.alphas[(j + 2) % k] for j in range(k))
        if k == 3:
            self.spec = SCSpec((0.0, 1.0), canon_alphas, canon_images)
        else:
            if z4 is None:
                raise DomainError("four-line disk map needs the accessory parameter z4")
            if not (0.0 < z4 < 1.0):
                raise DomainError("z4 must lie in (0, 1)")
            self.spec = SCSpec((0.0, z4, 1.0), canon_alphas, canon_images)
            self.spec_rescaled = SCSpec((0.0, 1.0, 1.0 / z4), canon_alphas, canon_images)

    def boundary_images(self) -> dict[float, complex]:
        if self.k == 3:
            return {1.0: self.vertices[0], 0.0: self.vertices[2]}
        return {1.0: self.vertices[0], 0.0: self.vertices[2], self.z4: self.vertices[3]}

    def region_tag(self, z) -> str:
        if self.k == 3:
            ratios = {
                "near_zero": _absmax_arr(z),
                "near_one": _absmax_arr(1.0 - z),
                "near_infinity": _inv_absmin(z),
            }
        else:
            ratios = _quad_ratios(self.z4, z)
        tag = min(ratios, key=ratios.get)
        return tag if ratios[tag] < 1.0 - _SERIES_MARGIN else "quadrature_only"

    def eval(self, z, ctl: SeriesControl = DEFAULT_CONTROL):
        """Evaluate at a scalar point (series clause, quadrature fallback)."""
        if complex(z).imag < -1e-15:
            raise DomainError("disk map is defined on the closed upper half plane")
        tag = self.region_tag(z)
        if tag == "quadrature_only":
            return sc_quadrature(self.spec, z)
        if self.k == 3:
            return _triangle_clause(self.spec, tag, z, ctl)
        return _quad_clause(self.spec.images, self.spec.exponents, self.z4, tag, z, ctl)

    def eval_rescaled(self, zeta, ctl: SeriesControl = DEFAULT_CONTROL):
        """w(z4 * zeta) evaluated in the rescaled coordinate (k = 4 only)."""
        if self.k != 4:
            raise DomainError("rescaled evaluation requires four lines")
        return self.eval(zeta * self.z4, ctl)

    def eval_strip(self, i: int, tau, sigma, delta: float,
                   ctl: SeriesControl = DEFAULT_CONTROL):
        """w composed with the strip chart of marked point i (scenario labels).

        The local clause is evaluated directly in the exactly-representable
        strip coordinate delta e^{pi(tau + i sigma)}; forming z = 1 + tiny and
        re-expanding would lose the point to floating-point absorption, since
        the map still varies on scales far below machine epsilon near a
        prevertex whose angle exponent is small.
        """
        w = math.pi * (np.asarray(tau, dtype=float) + 1j * np.asarray(sigma, dtype=float))
        e = np.exp(w)
        if self.k == 3:
            if i == 1:
                return _triangle_near_one_local(self.spec, -delta * e, ctl)
            if i == 2:
                return _triangle_clause(self.spec, "near_infinity",
                                        -(1.0 / delta) * np.exp(-w), ctl)
            if i == 3:
                return _triangle_clause(self.spec, "near_zero", delta * e, ctl)
            raise DomainError(f"no marked point {i} for three lines")
        args = (self.spec.images, self.spec.exponents, self.z4)
        if i == 1:
            return _quad_near_one_local(*args, -delta * e, ctl)
        if i == 2:
            return _quad_clause(*args, "near_infinity", -(1.0 / delta) * np.exp(-w), ctl)
        if i == 3:
            return _quad_near_zero_local(*args, delta * e, ctl)
        if i == 4:
            return _quad_near_xi_local(*args, -delta * e, ctl)
        raise DomainError(f"no marked point {i} for four lines")

    def eval_grid(self, zs: np.ndarray, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
        """Vectorized evaluation: points are grouped by clause, each group is
        fed to the array-capable series; leftovers go through quadrature."""
        zs = np.asarray(zs, dtype=complex)
        if zs.size and float(np.min(zs.imag)) < -1e-15:
            raise DomainError("disk map is defined on the closed upper half plane")
        out = np.empty(zs.shape, dtype=complex)
        tags = np.array([self.region_tag(z) for z in zs.ravel()])
        flat = zs.ravel()
        res = out.ravel()
        for tag in set(tags.tolist()):
            mask = tags == tag
            pts = flat[mask]
            if tag == "quadrature_only":
                res[mask] = [sc_quadrature(self.spec, z) for z in pts]
            elif self.k == 3:
                res[mask] = _triangle_clause(self.spec, tag, pts, ctl)
            else:
                res[mask] = _quad_clause(self.spec.images, self.spec.exponents,
                                         self.z4, tag, pts, ctl)
        return out


def build_disk_map(scenario: Scenario, z4: Optional[float] = None) -> DiskMap:
    return DiskMap(scenario, z4=z4)
