"""Real-parameter, complex-argument special functions.

Everything downstream (series representations of Schwarz-Christoffel maps,
accessory-parameter residuals, analytic error bounds) is built from the four
series implemented here: the Gauss hypergeometric series, Appell's first
two-variable series, Horn's G2 series, and the connection formula expressing
Appell's function in an annulus as an Appell part plus a G2 part.

Parameters are always real (complex parameters are rejected by construction:
the signatures take floats); arguments may be real, complex, or numpy arrays
of either, so grid sweeps can reuse the scalar code paths.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .errors import BranchError, DomainError, NoConvergence, PoleError

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "ln_gamma",
    "gamma_value",
    "ln_gamma_ratio",
    "pochhammer",
    "gauss_2f1",
    "gauss_2f1_complement",
    "appell_f1",
    "horn_g2",
    "f1_connection",
]

# Test hook: scales the gamma prefactor of the first connection-formula term.
# The CLI selftest perturbs this to confirm the residual checks are sensitive.
_PREFACTOR_SCALE = 1.0


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every series in this module.

    A sum is accepted once enough consecutive increments (two for single
    series, three for anti-diagonal sums of double series) fall below
    ``rel_tol * |partial sum| + abs_tol``.
    """

    rel_tol: float = 1e-13
    abs_tol: float = 1e-300
    max_terms: int = 20000

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.abs_tol <= 0.0:
            raise ValueError("abs_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_CONTROL = SeriesControl()


def _absmax(v) -> float:
    if isinstance(v, np.ndarray):
        return float(np.max(np.abs(v))) if v.size else 0.0
    return abs(v)


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def ln_gamma(x: float) -> tuple[float, int]:
    """Return ``(log |Gamma(x)|, sign(Gamma(x)))`` for real non-pole x.

    Positive arguments defer to ``math.lgamma``; negative non-integer
    arguments go through the reflection formula
    ``Gamma(x) Gamma(1-x) = pi / sin(pi x)``, which also fixes the sign.
    """
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma pole at x={x}")
    if x > 0.0:
        return math.lgamma(x), 1
    m = math.floor(x)
    frac = x - m  # in (0, 1), so sin(pi*frac) > 0
    logabs = math.log(math.pi) - math.log(math.sin(math.pi * frac)) - math.lgamma(1.0 - x)
    sign = 1 if m % 2 == 0 else -1
    return logabs, sign


def gamma_value(x: float) -> float:
    """Signed Gamma(x); overflows to +-inf rather than raising."""
    logabs, sign = ln_gamma(x)
    try:
        return sign * math.exp(logabs)
    except OverflowError:
        return sign * math.inf


def ln_gamma_ratio(numerators, denominators) -> tuple[float, int]:
    """log|prod Gamma(n_i) / prod Gamma(d_j)| together with the overall sign."""
    logabs, sign = 0.0, 1
    for x in numerators:
        la, s = ln_gamma(x)
        logabs += la
        sign *= s
    for x in denominators:
        la, s = ln_gamma(x)
        logabs -= la
        sign *= s
    return logabs, sign


def gamma_ratio(numerators, denominators) -> float:
    logabs, sign = ln_gamma_ratio(numerators, denominators)
    return sign * math.exp(logabs)


def pochhammer(a: float, k: int) -> float:
    """Shifted factorial (a)_k = Gamma(a+k)/Gamma(a) for integer k of any sign.

    Negative k uses (a)_{-m} = (-1)^m / (1-a)_m, which stays finite-precision
    friendly near poles instead of cancelling two large gamma values.
    """
    if k == 0:
        return 1.0
    if k > 0:
        out = 1.0
        for j in range(k):
            out *= a + j
        return out
    m = -k
    denom = 1.0
    for j in range(m):
        factor = 1.0 - a + j
        if factor == 0.0:
            raise PoleError(f"pochhammer pole: ({a})_{k} crosses zero at offset {-1 - j}")
        denom *= factor
    return (-1.0 if m % 2 else 1.0) / denom


def _jacobi_unit_interval(n: int, exp_left: float, exp_right: float):
    """Nodes/weights for int_0^1 t^exp_left (1-t)^exp_right f(t) dt."""
    x, w = roots_jacobi(n, exp_right, exp_left)
    t = 0.5 * (x + 1.0)
    scale = 2.0 ** (-(exp_left + exp_right + 1.0))
    return t, scale * w


def _euler_2f1(a: float, b: float, c: float, z, ctl: SeriesControl):
    # Euler integral: valid for c > b > 0 and z off the cut [1, inf).
    if not (c > b > 0.0):
        raise DomainError("Euler integral path for 2F1 requires c > b > 0")
    zc = complex(z)
    if zc.imag == 0.0 and zc.real >= 1.0:
        raise BranchError("2F1 Euler integral evaluated on the cut [1, inf)")
    pref = math.exp(math.lgamma(c) - math.lgamma(b) - math.lgamma(c - b))
    prev = None
    # roots_jacobi loses accuracy past n ~ 100 for exponents near -1, so the
    # ladder stays short and the acceptance threshold matches what n=96 gives.
    for n in (24, 48, 96, 160):
        t, w = _jacobi_unit_interval(n, b - 1.0, c - b - 1.0)
        val = pref * np.sum(w * np.power(1.0 - zc * t, -a))
        if prev is not None and abs(val - prev) <= 5e-12 * max(1.0, abs(val)):
            return complex(val) if isinstance(z, complex) or zc.imag != 0.0 else float(val.real)
        prev = val
    raise NoConvergence("2F1 Euler integral did not stabilize")


def _euler_f1(a: float, b1: float, b2: float, c: float, x, y, ctl: SeriesControl):
    if not (0.0 < a < c):
        raise DomainError("Euler integral path for F1 requires 0 < a < c")
    xc, yc = complex(x), complex(y)
    for arg in (xc, yc):
        if arg.imag == 0.0 and arg.real >= 1.0:
            raise BranchError("F1 Euler integral evaluated on the cut [1, inf)")
    pref = math.exp(math.lgamma(c) - math.lgamma(a) - math.lgamma(c - a))
    prev = None
    for n in (24, 48, 96, 160):
        t, w = _jacobi_unit_interval(n, a - 1.0, c - a - 1.0)
        vals = np.power(1.0 - xc * t, -b1) * np.power(1.0 - yc * t, -b2)
        val = pref * np.sum(w * vals)
        if prev is not None and abs(val - prev) <= 5e-12 * max(1.0, abs(val)):
            return complex(val)
        prev = val
    raise NoConvergence("F1 Euler integral did not stabilize")


def gauss_2f1_complement(a: float, b: float, c: float, w: float,
                         ctl: SeriesControl = DEFAULT_CONTROL):
    """2F1(a, b; c; 1 - w) taking the complement w in (0, 1) directly.

    Needed whenever the argument sits exponentially close to 1: forming
    1 - w in floating point rounds to exactly 1 long before the function
    value stops depending on w (the w^{c-a-b} branch term stays order one).
    Requires c - a - b not an integer when the connection path runs.
    """
    if not (0.0 <= w < 1.0):
        raise DomainError("complement argument must lie in [0, 1)")
    if w >= 0.03:
        return gauss_2f1(a, b, c, 1.0 - w, ctl)
    if w == 0.0:
        return gauss_2f1(a, b, c, 1.0, ctl)
    s = c - a - b
    if abs(s - round(s)) < 1e-9:
        raise DomainError("2F1 near z=1 with integer c-a-b is unsupported")
    t1 = gamma_ratio((c, s), (c - a, c - b)) * gauss_2f1(a, b, a + b - c + 1.0, w, ctl)
    t2 = gamma_ratio((c, -s), (a, b)) * w ** s * gauss_2f1(c - a, c - b, s + 1.0, w, ctl)
    return t1 + t2


def gauss_2f1(a: float, b: float, c: float, z, ctl: SeriesControl = DEFAULT_CONTROL,
              method: str = "auto"):
    """Gauss hypergeometric function 2F1(a, b; c; z).

    ``method="auto"`` sums the defining series for |z| < 1, applies the Gauss
    summation formula at exactly z == 1 (requires c-a-b > 0), and switches to
    the 1-z connection pair for real z in [0.97, 1); any other argument
    raises DomainError.  ``method="integral"`` forces the Euler integral path
    (c > b > 0, z off the cut [1, inf)).
    """
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 parameter c={c} is a nonpositive integer")
    if method == "integral":
        return _euler_2f1(a, b, c, z, ctl)
    if method not in ("auto", "series"):
        raise ValueError(f"unknown method {method!r}")
    if not isinstance(z, np.ndarray):
        zc = complex(z)
        if zc == 1.0:
            if c - a - b <= 0.0:
                raise DomainError("2F1 at z=1 requires c - a - b > 0")
            return gamma_ratio((c, c - a - b), (c - a, c - b))
        if method == "auto" and zc.imag == 0.0 and 0.97 <= zc.real < 1.0:
            return gauss_2f1_complement(a, b, c, 1.0 - zc.real, ctl)
    if _absmax(z) >= 1.0:
        raise DomainError("2F1 series requires |z| < 1 (or z == 1 with c-a-b > 0)")

    total = 1.0 + 0.0 * z  # matches z's scalar/array type
    term = total
    small_run = 0
    for n in range(ctl.max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + term
        if _absmax(term) <= ctl.rel_tol * _absmax(total) + ctl.abs_tol:
            small_run += 1
            if small_run >= 2:
                return total
        else:
            small_run = 0
    raise NoConvergence(f"2F1 series exceeded {ctl.max_terms} terms")


def _scaled_poch_powers(b: float, arg, norms: list[float], values: list, upto: int):
    """Extend ``values[m] = (b)_m arg^m / m!`` (and its norm cache) up to index ``upto``."""
    while len(values) <= upto:
        m = len(values)
        nxt = values[m - 1] * ((b + m - 1.0) / m) * arg
        values.append(nxt)
        norms.append(_absmax(nxt))


def appell_f1(a: float, b1: float, b2: float, c: float, x, y,
              ctl: SeriesControl = DEFAULT_CONTROL, method: str = "auto"):
    """Appell's first hypergeometric function F1(a; b1, b2; c; x, y).

    The double series is summed along anti-diagonals m+n = s and accepted
    after three consecutive anti-diagonal sums drop below tolerance; this
    guards against the sign-alternating cancellations a single-increment test
    misreads.  Requires |x| < 1 and |y| < 1; ``method="integral"`` switches to
    the one-dimensional Euler integral (0 < a < c).
    """
    if _is_nonpositive_integer(c):
        raise PoleError(f"F1 parameter c={c} is a nonpositive integer")
    if method == "integral":
        return _euler_f1(a, b1, b2, c, x, y, ctl)
    if method not in ("auto", "series"):
        raise ValueError(f"unknown method {method!r}")
    if _absmax(x) >= 1.0 or _absmax(y) >= 1.0:
        raise DomainError("F1 double series requires |x| < 1 and |y| < 1")

    one = 1.0 + 0.0 * (x * y)
    xv, xn = [one], [_absmax(one)]
    yv, yn = [one], [_absmax(one)]
    total = one
    ratio_ac = 1.0
    small_run = 0
    ymax = yn[0]
    for s in range(1, ctl.max_terms):
        ratio_ac *= (a + s - 1.0) / (c + s - 1.0)
        _scaled_poch_powers(b1, x, xn, xv, s)
        _scaled_poch_powers(b2, y, yn, yv, s)
        ymax = max(ymax, yn[s])
        floor = 1e-3 * (ctl.rel_tol * _absmax(total) + ctl.abs_tol)
        diag = 0.0
        for m in range(s + 1):
            if m > 8 and abs(ratio_ac) * xn[m] * ymax < floor:
                break
            diag = diag + xv[m] * yv[s - m]
        diag = ratio_ac * diag
        total = total + diag
        if _absmax(diag) <= ctl.rel_tol * _absmax(total) + ctl.abs_tol:
            small_run += 1
            if small_run >= 3:
                return total
        else:
            small_run = 0
    raise NoConvergence(f"F1 double series exceeded {ctl.max_terms} anti-diagonals")


def _extend_signed_poch_pair(gamma: float, delta: float, g: dict, kmax: int):
    """Grow g[k] = (gamma)_k (delta)_{-k} to cover k in [-kmax, kmax]."""
    khi = max(g)
    for k in range(khi + 1, kmax + 1):
        denom = k - delta
        if denom == 0.0:
            raise PoleError(f"G2 pole: delta={delta} hit by offset {k}")
        g[k] = -g[k - 1] * (gamma + k - 1.0) / denom
    jhi = -min(g)
    for j in range(jhi + 1, kmax + 1):
        denom = j - gamma
        if denom == 0.0:
            raise PoleError(f"G2 pole: gamma={gamma} hit by offset {-j}")
        g[-j] = -g[-(j - 1)] * (delta + j - 1.0) / denom


def horn_g2(alpha: float, beta: float, gamma: float, delta: float, x, y,
            ctl: SeriesControl = DEFAULT_CONTROL):
    """Horn's G2 series with the signed shifted factorials (gamma)_{n-m}, (delta)_{m-n}.

    The signed factors are generated through (a)_{-m} = (-1)^m / (1-a)_m; in
    the balanced case delta == -gamma this reduces to the stable form
    (-1)^{n-m} gamma / (gamma + n - m) without any cancellation-prone gamma
    ratios.  Requires |x| < 1 and |y| < 1.
    """
    if _absmax(x) >= 1.0 or _absmax(y) >= 1.0:
        raise DomainError("G2 double series requires |x| < 1 and |y| < 1")

    one = 1.0 + 0.0 * (x * y)
    xv, xn = [one], [_absmax(one)]
    yv, yn = [one], [_absmax(one)]
    total = one
    small_run = 0
    g = {0: 1.0}
    gmax = 1.0
    ymax = yn[0]
    for s in range(1, ctl.max_terms):
        _scaled_poch_powers(alpha, x, xn, xv, s)
        _scaled_poch_powers(beta, y, yn, yv, s)
        _extend_signed_poch_pair(gamma, delta, g, s)
        gmax = max(gmax, abs(g[s]), abs(g[-s]))
        ymax = max(ymax, yn[s])
        floor = 1e-3 * (ctl.rel_tol * _absmax(total) + ctl.abs_tol)
        diag = 0.0
        for m in range(s + 1):
            if m > 8 and xn[m] * ymax * gmax < floor:
                break
            diag = diag + xv[m] * yv[s - m] * g[s - 2 * m]
        total = total + diag
        if _absmax(diag) <= ctl.rel_tol * _absmax(total) + ctl.abs_tol:
            small_run += 1
            if small_run >= 3:
                return total
        else:
            small_run = 0
    raise NoConvergence(f"G2 double series exceeded {ctl.max_terms} anti-diagonals")


def _neg_power(x, expo: float):
    """(-x)^expo with arg(-x) := arg(x) - pi, the continuation that makes the
    argument vanish on the negative real axis and picks e^{-i pi} on the
    closed upper half plane."""
    xc = complex(x)
    if xc == 0.0:
        raise BranchError("(-x)^p undefined at x = 0")
    return cmath.exp(expo * complex(math.log(abs(xc)), cmath.phase(xc) - math.pi))


def _require_noninteger(value: float, label: str):
    if abs(value - round(value)) < 1e-9:
        raise PoleError(f"connection formula requires {label} non-integer (got {value})")


def f1_connection(alpha: float, beta_p: float, beta: float, gamma: float, y, x,
                  ctl: SeriesControl = DEFAULT_CONTROL):
    """Evaluate F1(alpha; beta_p, beta; gamma; y, x) in the annulus via connection.

    Valid when |1/x| < 1, |y/x| < 1 and |y| < 1: returns

        C1 (-x)^{-alpha} F1(alpha; 1+alpha-gamma, beta_p; 1+alpha-beta; 1/x, y/x)
      + C2 (-x)^{-beta}  G2(beta, beta_p; alpha-beta, 1+beta-gamma; -1/x, -y)

    with gamma-function coefficients C1, C2.  The powers (-x)^* use the
    branch whose argument vanishes for real x < y < 0, continued to the
    closed upper half plane by -x = e^{-i pi} x.
    """
    _require_noninteger(gamma, "gamma")
    _require_noninteger(beta - alpha, "beta - alpha")
    _require_noninteger(beta - gamma, "beta - gamma")
    xc, yc = complex(x), complex(y)
    if abs(xc) <= 1.0 or abs(yc / xc) >= 1.0 or abs(yc) >= 1.0:
        raise DomainError("connection formula needs 1/|x| < 1, |y/x| < 1, |y| < 1")

    c1 = gamma_ratio((beta - alpha, gamma), (beta, gamma - alpha)) * _PREFACTOR_SCALE
    c2 = gamma_ratio((alpha - beta, gamma), (alpha, gamma - beta))
    t1 = c1 * _neg_power(xc, -alpha) * appell_f1(
        alpha, 1.0 + alpha - gamma, beta_p, 1.0 + alpha - beta, 1.0 / xc, yc / xc, ctl)
    t2 = c2 * _neg_power(xc, -beta) * horn_g2(
        beta, beta_p, alpha - beta, 1.0 + beta - gamma, -1.0 / xc, -yc, ctl)
    return t1 + t2
