"""Fourier transform of a normalised smooth bump used as a decaying multiplier.

    sigma_nu(t) = exp(-nu / (1 - t^2)) on (-1, 1),   C_nu = 1 / int sigma_nu,
    H_beta(z)   = C_nu int_{-1}^{1} sigma_nu(t) exp(-i beta t z) dt.

H_beta is entire of exponential type ``beta``, even, real on the real axis,
``H_beta(0) = 1`` and decays like ``exp(-sqrt(2 nu beta |x|))`` along the real
line.  Large real arguments are evaluated on a steepest-descent contour
through the saddle near ``t = 1`` so that tiny values keep full relative
accuracy; everything is carried as (mantissa, log-scale) pairs.  Complex
arguments use the real-segment rule, which is accurate to about 1e-13
relative to ``exp(beta |Im z|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureNotConverged
from .quadrature import integrate, integrate_doubling, legendre_rule
from .reports import BoundReport, calibrate_validate

_RTOL = 1e-13


def bump(nu: float, t):
    """sigma_nu(t), zero outside (-1, 1)."""
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-nu / (1.0 - t[inside] ** 2))
    return out


sigma_nu = bump


def _scaled_bump(nu, t):
    # exp(nu) * sigma_nu(t); analytic in t away from +-1
    return np.exp(-nu * t * t / (1.0 - t * t))


@lru_cache(maxsize=256)
def _log_mass(nu: float) -> float:
    """log of int_{-1}^{1} exp(-nu t^2/(1-t^2)) dt."""
    if nu < 0:
        raise DomainError("nu must be non-negative")
    if nu == 0:
        return math.log(2.0)
    if nu >= 1:
        m = integrate_doubling(lambda t: _scaled_bump(nu, t), -1.0, 1.0, rtol=1e-14, n0=64)
    else:
        # the edge layer 1 - |t| ~ nu is steep for small nu; integrate in e = 1 - |t|
        g = lambda e: np.exp(-nu * (1 - e) ** 2 / (e * (2 - e)))
        marks = nu * np.geomspace(1e-2, 1e2, 9)
        m = 2 * integrate(g, 0.0, 1.0, rtol=1e-14, breakpoints=marks[marks < 1])
    return math.log(float(m))


def log_c_nu(nu: float) -> float:
    """log C_nu, stable for large nu."""
    return nu - _log_mass(float(nu))


def c_nu(nu: float) -> float:
    """Normalising constant C_nu = 1 / int sigma_nu."""
    return math.exp(log_c_nu(nu))


def nu_for(alpha: float, delta: float, beta: float) -> float:
    """nu solving beta nu^(alpha-1) = ((pi + delta)/sin(pi/alpha))^alpha."""
    lead = ((math.pi + delta) / math.sin(math.pi / alpha)) ** alpha
    return (lead / beta) ** (1.0 / (alpha - 1.0))


@dataclass(frozen=True)
class MultiplierConfig:
    nu: float
    beta: float
    delta: float
    alpha: float
    quad_nodes: int = 64

    def __post_init__(self):
        if self.alpha < 2:
            raise DomainError(f"multiplier is only defined for alpha >= 2, got {self.alpha}")
        if not (self.beta > 0 and self.nu > 0 and self.delta > 0):
            raise DomainError("beta, nu and delta must be positive")
        want = nu_for(self.alpha, self.delta, self.beta)
        if abs(self.nu - want) > 1e-10 * want:
            raise DomainError(
                f"nu={self.nu} is not linked to beta={self.beta} (expected {want})"
            )

    @property
    def log_c(self) -> float:
        return log_c_nu(self.nu)

    @property
    def c(self) -> float:
        return c_nu(self.nu)


def link_beta_to_nu(alpha: float, delta: float, beta: float, quad_nodes: int = 64) -> MultiplierConfig:
    """Config whose nu is tied to beta so the multiplier decay beats the product growth."""
    if alpha < 2:
        raise DomainError(f"multiplier is only defined for alpha >= 2, got {alpha}")
    if not (beta > 0 and delta > 0):
        raise DomainError("beta and delta must be positive")
    return MultiplierConfig(nu_for(alpha, delta, beta), float(beta), float(delta), float(alpha), quad_nodes)


def _rule(n):
    x, w = legendre_rule(n)
    return x, w


def _direct(cfg, z):
    """Real-axis quadrature; returns mantissa with log-scale beta|Im z|."""
    nu, beta = cfg.nu, cfg.beta
    scale = beta * np.abs(z.imag)
    width = float(np.max(beta * np.abs(z.real))) if z.size else 0.0
    n = max(cfg.quad_nodes, 1 << int(math.ceil(math.log2(2.0 * width + 64))))

    def q(n):
        x, w = _rule(n)
        s = _scaled_bump(nu, x)
        ph = np.exp(-1j * beta * np.outer(z, x) - scale[:, None])
        return ph @ (w * s)

    prev = q(n)
    while n < (1 << 16):
        n *= 2
        cur = q(n)
        err = np.abs(cur - prev)
        # the scaled integrand is bounded by 1, so 1e-14 is the round-off floor
        if np.all(err <= np.maximum(_RTOL * np.abs(cur), 1e-14)):
            return cur * math.exp(-_log_mass(nu)), scale
        prev = cur
    raise QuadratureNotConverged("multiplier quadrature did not converge on the real segment")


def _eps_exponent(nu, bx, eps):
    """log of exp(nu) sigma_nu(1 - eps) exp(i bx eps), i.e. the integrand with the phase exp(-i bx) removed."""
    return nu - nu / (eps * (2.0 - eps)) + 1j * bx * eps


def _eps_saddle(nu, bx):
    """Saddle of the exponent in eps = 1 - t, starting from the large-bx asymptote."""
    e = np.sqrt(nu / (2.0 * bx)) * np.exp(0.25j * np.pi)
    for _ in range(80):
        p = e * (2.0 - e)
        dp = 2.0 - 2.0 * e
        F = nu * dp / p**2 + 1j * bx
        dF = nu * (-2.0 * p - 2.0 * dp**2) / p**3
        step = F / dF
        e = e - step
        if np.all(np.abs(step) <= 1e-15 * np.abs(e)):
            break
    return e


def _contour(cfg, x):
    """Steepest-descent evaluation for real x with beta*x large; returns (mantissa, log-scale).

    H(x) = (2/mass) Re int_0^1 s(t) exp(-i beta x t) dt.  The piece from 0 to
    -iY is purely imaginary and drops out, and the remaining path runs
    -iY -> Re(t_s) - iY -> t_s -> 1 through the saddle t_s.  In the scaled
    variable (1 - t) / sqrt(nu/(2 beta x)) the vertical leg and the final ray
    are descent paths, so the integrand never exceeds its saddle value.  The
    legs are parametrised by eps = 1 - t to avoid cancellation near t = 1.
    """
    nu, beta = cfg.nu, cfg.beta
    bx = beta * x.real
    es = _eps_saddle(nu, bx)
    L = _eps_exponent(nu, bx, es).real
    Y = np.maximum((nu + 40.0 - L) / bx, 2.0 * np.abs(es.imag))
    corner = es.real + 1j * Y
    legs = [(1.0 + 1j * Y, corner), (corner, es), (es, np.zeros_like(es))]

    def q(n):
        g, w = _rule(n)
        v = 0.5 * (g + 1.0)
        w = 0.5 * w
        total = np.zeros(x.shape, complex)
        for a, b in legs:
            e = a[:, None] + (b - a)[:, None] * v[None, :]
            total -= (b - a) * (np.exp(_eps_exponent(nu, bx[:, None], e) - L[:, None]) @ w)
        return total

    # the phase beta*x itself is only known to about eps*beta*x
    rtol = np.maximum(_RTOL, 16 * np.finfo(float).eps * bx)
    n = max(cfg.quad_nodes, 64)
    prev = q(n)
    while n < (1 << 15):
        n *= 2
        cur = q(n)
        # the real part may cancel near zeros of H, so compare against |J|
        if np.all(np.abs(cur - prev) <= rtol * np.maximum(np.abs(cur), 1e-300)):
            J = np.exp(-1j * bx) * cur
            return 2.0 * J.real * math.exp(-_log_mass(nu)) + 0j, L
        prev = cur
    raise QuadratureNotConverged("multiplier contour quadrature did not converge")


def h_beta_scaled(cfg: MultiplierConfig, z):
    """Return (mantissa, log_scale) with H_beta(z) = mantissa * exp(log_scale)."""
    z = np.asarray(z, complex)
    shape = z.shape
    z = z.ravel()
    real_input = np.all(z.imag == 0)
    zz = np.where(z.real < 0, -z, z)  # H is even
    thr = max(0.5 * cfg.nu, 1.0)
    use_contour = (cfg.beta * zz.real > thr) & (zz.imag == 0)
    mant = np.empty(z.shape, complex)
    scale = np.empty(z.shape, float)
    for mask, fn in ((~use_contour, _direct), (use_contour, _contour)):
        if np.any(mask):
            m, s = fn(cfg, zz[mask])
            mant[mask], scale[mask] = m, s
    if real_input:
        mant = mant.real.astype(complex)
    return mant.reshape(shape), scale.reshape(shape)


def h_beta(cfg: MultiplierConfig, z):
    """H_beta(z) for scalar or array z."""
    scalar = np.ndim(z) == 0
    m, s = h_beta_scaled(cfg, z)
    with np.errstate(over="ignore", under="ignore"):
        out = m * np.exp(s)
    return complex(out) if scalar else out


def log_abs_h_beta(cfg: MultiplierConfig, z):
    scalar = np.ndim(z) == 0
    m, s = h_beta_scaled(cfg, z)
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(m)) + s
    return float(out) if scalar else out


def log_h_beta_imag(cfg: MultiplierConfig, y):
    """log H_beta(i y) for real y; the integrand is positive so no cancellation."""
    y = np.asarray(y, float)
    m, s = h_beta_scaled(cfg, 1j * y)
    return np.log(m.real) + s


def est_mul_decay_check(cfg: MultiplierConfig, x_grid) -> BoundReport:
    """Check log|H(x)| + ((pi+delta/2)/sin(pi/alpha)) |x|^(1/alpha) <= 3nu/4 + log(nu+1)/2 + c0."""
    x = np.asarray(x_grid, float)
    lead = (math.pi + cfg.delta / 2) / math.sin(math.pi / cfg.alpha)
    la = log_abs_h_beta(cfg, x)
    slack = la + lead * np.abs(x) ** (1.0 / cfg.alpha) - (0.75 * cfg.nu + 0.5 * math.log(cfg.nu + 1))
    return calibrate_validate("multiplier decay", np.abs(x), la, slack, allow_slope=False)


def minmult_check(cfg: MultiplierConfig, y_grid) -> BoundReport:
    """Lower bound H(iy) >= exp(beta y / (2 sqrt(nu+1))) / (K sqrt(nu+1)).

    ``c0`` of the report is log K (clipped below at 0 so K >= 1).
    """
    y = np.asarray(y_grid, float)
    if np.any(y < 0):
        raise DomainError("lower bound is stated for y >= 0")
    lh = log_h_beta_imag(cfg, y)
    target = cfg.beta * y / (2 * math.sqrt(cfg.nu + 1)) - 0.5 * math.log(cfg.nu + 1)
    deficit = target - lh  # must stay <= log K
    rep = calibrate_validate("multiplier lower bound on the imaginary axis", y, lh, deficit,
                             allow_slope=False)
    if rep.c0 < 0:
        rep.max_violation += rep.c0
        rep.c0 = 0.0
    return rep


@dataclass
class MultiplierProperties:
    h_at_zero: complex
    c_nu: float
    c_lower: float
    c_upper: float
    max_type_excess: float

    @property
    def holds(self) -> bool:
        return (abs(self.h_at_zero - 1) <= 1e-12 and self.c_lower <= self.c_nu <= self.c_upper
                and self.max_type_excess <= 0)


def multiplier_properties(cfg: MultiplierConfig, grid) -> MultiplierProperties:
    """H(0) = 1, the C_nu sandwich and |H(z)| <= exp(beta |Im z|) on ``grid``."""
    grid = np.asarray(grid, complex)
    la = log_abs_h_beta(cfg, grid)
    excess = float(np.max(la - cfg.beta * np.abs(grid.imag)))
    nu = cfg.nu
    return MultiplierProperties(
        h_at_zero=h_beta(cfg, 0.0),
        c_nu=cfg.c,
        c_lower=0.5 * math.exp(nu),
        c_upper=1.5 * math.sqrt(nu + 1) * math.exp(nu),
        max_type_excess=excess,
    )
