"""Numerical checks of the integral identities and inequalities behind the product bounds.

Integrals (alpha > 1, x > 0):

    U(x) = int_0^1 ((1+v)^(1/a) - (1-v)^(1/a)) / (v (v+x)) dv
    V(x) = int_1^inf (v+1)^(1/a) / (v (v+x)) dv
    W(x) = int_1^inf (u-1)^(1/a) / (u (u+x)) du
    I(a) = int_0^inf dt / (t^(1/a) (1+t)) = pi / sin(pi/a)

Every algebraic endpoint singularity is removed by a power substitution so
the adaptive Gauss-Legendre rule sees smooth integrands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, rgamma

from .errors import DomainError, SeriesNotConverged
from .quadrature import integrate
from .reports import InequalityReport

RTOL = 1e-12
DEFAULT_ALPHAS = (2.0, 2.25, 2.5, 3.0, 4.0, 8.0)


def default_x_grid(n: int = 200):
    return np.geomspace(1e-3, 1e3, n)


def unit_grid(n: int = 200):
    return np.linspace(0.0, 1.0, n)


def _check_alpha(alpha):
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")


def _check_x(x):
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")


def _peaks(center, lo, hi):
    return [p for p in (0.01 * center, 0.1 * center, center, 10 * center) if lo < p < hi]


def integral_U(alpha: float, x: float) -> float:
    _check_alpha(alpha)
    _check_x(x)
    ia = 1.0 / alpha

    def near0(v):
        # (1+v)^(1/a) - (1-v)^(1/a) = (1-v)^(1/a) expm1(2 atanh(v) / a), no cancellation
        return (1 - v) ** ia * np.expm1(2 * ia * np.arctanh(v)) / (v * (v + x))

    def near1(w):
        # v = 1 - w^a
        wa = w ** alpha
        v = 1 - wa
        return ((1 + v) ** ia - w) / (v * (v + x)) * alpha * w ** (alpha - 1)

    left = integrate(near0, 0.0, 0.5, rtol=RTOL, breakpoints=_peaks(x, 0.0, 0.5))
    right = integrate(near1, 0.0, 0.5 ** ia, rtol=RTOL)
    return float(left + right)


def integral_V(alpha: float, x: float) -> float:
    _check_alpha(alpha)
    _check_x(x)
    ia = 1.0 / alpha
    p = alpha / (alpha - 1)

    # v = 1/s, s = w^p
    def f(w):
        s = w ** p
        return p * (1 + s) ** ia / (1 + x * s)

    return float(integrate(f, 0.0, 1.0, rtol=RTOL, breakpoints=_peaks(x ** (-1 / p), 0.0, 1.0)))


def integral_W(alpha: float, x: float) -> float:
    _check_alpha(alpha)
    _check_x(x)
    ia = 1.0 / alpha
    p = alpha / (alpha - 1)

    # u = 1/s gives int_0^1 (1-s)^(1/a) s^(-1/a) / (1 + s x) ds; s = w^p near 0
    def near0(w):
        s = w ** p
        return p * (1 - s) ** ia / (1 + x * s)

    # 1 - s = w^a near 1
    def near1(w):
        wa = w ** alpha
        s = 1 - wa
        return alpha * w ** alpha * s ** (-ia) / (1 + x * s)

    a_end = 0.5 ** (1 / p)
    left = integrate(near0, 0.0, a_end, rtol=RTOL, breakpoints=_peaks(x ** (-1 / p), 0.0, a_end))
    right = integrate(near1, 0.0, 0.5 ** ia, rtol=RTOL)
    return float(left + right)


def w_closed_form(alpha: float, x: float) -> float:
    return math.pi * math.expm1(math.log1p(x) / alpha) / (x * math.sin(math.pi / alpha))


def integral_I(alpha: float) -> float:
    """int_0^inf t^(-1/a)/(1+t) dt as p int_0^1 dw/(1+w^p) + a int_0^1 dw/(1+w^a), p = a/(a-1)."""
    _check_alpha(alpha)
    p = alpha / (alpha - 1)
    lo = integrate(lambda w: p / (1 + w ** p), 0.0, 1.0, rtol=RTOL)
    hi = integrate(lambda w: alpha / (1 + w ** alpha), 0.0, 1.0, rtol=RTOL)
    return float(lo + hi)


def i_closed_form(alpha: float) -> float:
    return math.pi / math.sin(math.pi / alpha)


def harmonic_frac(r: float) -> float:
    """H_r = int_0^1 (1 - t^r)/(1 - t) dt, via t = w^(1/r)."""
    if not 0 < r <= 1:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    q = 1.0 / r

    def f(w):
        w = np.asarray(w, float)
        # (1 - w) / (1 - w^q) with 1 - w^q = -expm1(q log w)
        ratio = np.where(w < 1, (1 - w) / -np.expm1(q * np.log(np.maximum(w, 1e-300))), r)
        return q * w ** (q - 1) * ratio

    return float(integrate(f, 0.0, 1.0, rtol=RTOL))


# --- Gauss hypergeometric function ------------------------------------------------

def _series(a, b, c, z, rtol=1e-15, max_terms=20000):
    term, total = 1.0, 1.0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if term == 0.0 or (abs(term) <= rtol * abs(total) and n > 2):
            return total
    raise SeriesNotConverged(f"2F1({a}, {b}; {c}; {z}) series did not converge in {max_terms} terms")


def _nonpos_int(v):
    return v <= 0 and float(v).is_integer()


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """2F1(a, b; c; z) for real z in [-1, 1).

    |z| <= 1/2 uses the Gauss series, z < -1/2 the Pfaff transformation (the
    argument z/(z-1) lands in (1/3, 1/2]) and z > 1/2 the connection formula
    around z = 1.
    """
    if _nonpos_int(c):
        raise DomainError("c must not be a non-positive integer")
    if not -1 <= z < 1:
        raise DomainError(f"z must lie in [-1, 1), got {z}")
    if _nonpos_int(a) or _nonpos_int(b) or abs(z) <= 0.5:
        return _series(a, b, c, z)
    if z < -0.5:
        return (1 - z) ** (-a) * hyp2f1(a, c - b, c, z / (z - 1))
    s = c - a - b
    if float(s).is_integer():
        # logarithmic case of the connection formula; fall back to the slow series
        return _series(a, b, c, z, max_terms=2_000_000)
    w = 1 - z
    t1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b) * _series(a, b, 1 - s, w)
    t2 = w ** s * gamma(c) * gamma(-s) * rgamma(a) * rgamma(b) * _series(c - a, c - b, 1 + s, w)
    return float(t1 + t2)


def v_from_hypergeometric(alpha: float, x: float) -> float:
    """x^(1-1/a) V(x) through its closed form in 2F1 (independent of the quadrature)."""
    ia = 1.0 / alpha
    return (-alpha * x ** (-ia) * hyp2f1(-ia, -ia, 1 - ia, -1.0)
            + alpha * (1 + 1 / x) ** ia * hyp2f1(-ia, -ia, 1 - ia, (x - 1) / (x + 1)))


# --- inequality suite ---------------------------------------------------------------

def _scaled(alpha, x, fn):
    return x ** (1 - 1 / alpha) * fn(alpha, x)


def _u1_value(x: float) -> float:
    if x == 0:
        return 0.0  # sqrt(x) log(1/x) -> 0
    return math.sqrt(x) * integral_U(2.0, x)


INEQUALITIES = {
    "a": "x^(1-1/a) (U + V) <= pi/sin(pi/a)",
    "b": "x^(1-1/a) W <= pi/sin(pi/a)",
    "c": "1 - 0.52 a + a 2^(1/a) <= pi/sin(pi/a)",
    "d": "1 - x^a <= (1+x)^(a-1) (1-x), x in [0, 1]",
    "e": "sqrt(x) U_2(x) <= 1, x in [0, 1]",
}


def _report(name, rows, grid, informational, n_wit=5):
    rows.sort(key=lambda r: -r[-1])
    return InequalityReport(name, float(rows[0][-1]) if rows else -math.inf,
                            rows[:n_wit], len(rows), grid, informational)


def verify_inequality_suite(alpha_grid=DEFAULT_ALPHAS, x_grid=None, unit_x=None,
                            which: str = "abcde") -> list[InequalityReport]:
    """Slack (lhs - rhs) of each inequality on the grids; negative means satisfied.

    Witness rows are ``(alpha, x, lhs, rhs, slack)`` for the worst points.
    Alphas below 2 are accepted and flag the reports as informational.
    """
    alpha_grid = [float(a) for a in alpha_grid]
    for a in alpha_grid:
        _check_alpha(a)
    x_grid = default_x_grid() if x_grid is None else np.asarray(x_grid, float)
    unit_x = unit_grid() if unit_x is None else np.asarray(unit_x, float)
    info = any(a < 2 for a in alpha_grid)
    gdesc = f"alpha={alpha_grid}; x=geom[{x_grid.min():g},{x_grid.max():g}]x{x_grid.size}"
    udesc = f"alpha={alpha_grid}; x=lin[{unit_x.min():g},{unit_x.max():g}]x{unit_x.size}"
    out = []
    if "a" in which:
        rows = []
        for a in alpha_grid:
            rhs = i_closed_form(a)
            for x in x_grid:
                lhs = x ** (1 - 1 / a) * (integral_U(a, x) + integral_V(a, x))
                rows.append((a, float(x), lhs, rhs, lhs - rhs))
        out.append(_report("a", rows, gdesc, info))
    if "b" in which:
        rows = []
        for a in alpha_grid:
            rhs = i_closed_form(a)
            for x in x_grid:
                lhs = _scaled(a, x, integral_W)
                rows.append((a, float(x), lhs, rhs, lhs - rhs))
        out.append(_report("b", rows, gdesc, info))
    if "c" in which:
        rows = []
        for a in alpha_grid:
            lhs, rhs = 1 - 0.52 * a + a * 2 ** (1 / a), i_closed_form(a)
            rows.append((a, math.nan, lhs, rhs, lhs - rhs))
        out.append(_report("c", rows, f"alpha={alpha_grid}", info))
    if "d" in which:
        rows = []
        for a in alpha_grid:
            for x in unit_x:
                lhs, rhs = 1 - x ** a, (1 + x) ** (a - 1) * (1 - x)
                rows.append((a, float(x), lhs, rhs, lhs - rhs))
        out.append(_report("d", rows, udesc, info))
    if "e" in which:
        rows = []
        for x in unit_x:
            lhs = _u1_value(float(x))
            rows.append((2.0, float(x), lhs, 1.0, lhs - 1.0))
        out.append(_report("e", rows, udesc.replace(str(alpha_grid), "[2.0]"), False))
    return out


def v_scaled_monotone(alpha: float, x_grid=None) -> bool:
    """Whether x -> x^(1-1/a) V(x) is non-decreasing on the grid."""
    x_grid = default_x_grid() if x_grid is None else np.asarray(x_grid, float)
    vals = np.array([_scaled(alpha, x, integral_V) for x in x_grid])
    return bool(np.all(np.diff(vals) >= -1e-12 * np.abs(vals[1:])))


@dataclass
class IdentityCheck:
    name: str
    args: tuple
    computed: float
    reference: float

    @property
    def rel_error(self) -> float:
        return abs(self.computed - self.reference) / abs(self.reference)


def identity_checks(alphas=(2.0, 2.5, 3.0, 4.0, 8.0), w_points=((2.0, 0.5), (2.0, 1.0), (2.0, 10.0),
                                                                (3.0, 0.5), (3.0, 1.0), (3.0, 10.0))):
    """I(alpha), W closed form, H_(1/2) and the 2F1 form of V against their references."""
    rows = [IdentityCheck("I", (a,), integral_I(a), i_closed_form(a)) for a in alphas]
    rows += [IdentityCheck("W", (a, x), integral_W(a, x), w_closed_form(a, x)) for a, x in w_points]
    rows.append(IdentityCheck("H", (0.5,), harmonic_frac(0.5), 2 - 2 * math.log(2)))
    rows.append(IdentityCheck("V-2F1", (3.0, 2.0), _scaled(3.0, 2.0, integral_V), v_from_hypergeometric(3.0, 2.0)))
    return rows
