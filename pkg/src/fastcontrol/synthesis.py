"""Biorthogonal families in time built from Paley-Wiener frequency functions.

Dispersive systems use

    g_n(x) = Phi_n(-x - lambda_n) H_beta(x + lambda_n),   beta = T(1 - delta)/2,

and parabolic systems

    h_n(x) = Phi_n(-i x - lambda_n) H_beta(c x) / H_beta(i lambda_n c),
    c = (sin(pi/alpha) / (2 sin(pi/(2 alpha))))^alpha,
    beta = (1 - delta) T (2 sin(pi/(2 alpha)))^alpha / (2 sin(pi/alpha)^alpha),

so that ``beta * c = (1 - delta) T / 2`` in both cases.  With the transform
``ghat(x) = int f(t) exp(-i x t) dt`` the inverse transforms are supported in
[-T/2, T/2] and satisfy

    int f_n(t) exp(i lambda_k t) dt = delta_nk      (dispersive),
    int w_n(t) exp(lambda_k t) dt   = delta_nk      (parabolic).

The inverse transform is a uniform frequency sum with spacing pi/T: by
Poisson summation it reproduces the 2T-periodisation of f exactly, which
coincides with f on [-T, T] because f vanishes outside [-T/2, T/2].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivisionDegenerate, DomainError, TailNotBounded
from .multiplier import MultiplierConfig, h_beta_scaled, link_beta_to_nu
from .products import log_product, product_roots
from .reports import rows_to_csv
from .signals import ControlSignal, ModalState
from .spectral import Kind, SpectralSystem

X_MAX = float(1 << 22)


def dispersive_multiplier(sys: SpectralSystem, T: float, delta: float) -> MultiplierConfig:
    if not (T > 0 and 0 < delta < 1):
        raise DomainError("need T > 0 and 0 < delta < 1")
    return link_beta_to_nu(sys.alpha, delta, T * (1 - delta) / 2)


def parabolic_scale(alpha: float) -> float:
    return (math.sin(math.pi / alpha) / (2 * math.sin(math.pi / (2 * alpha)))) ** alpha


def parabolic_multiplier(sys: SpectralSystem, T: float, delta: float) -> MultiplierConfig:
    if not (T > 0 and 0 < delta < 1):
        raise DomainError("need T > 0 and 0 < delta < 1")
    a = sys.alpha
    beta = (1 - delta) * T * (2 * math.sin(math.pi / (2 * a))) ** a / (2 * math.sin(math.pi / a) ** a)
    return link_beta_to_nu(a, delta, beta)


def multiplier_for(sys, T, delta):
    if sys.kind is Kind.PARABOLIC:
        return parabolic_multiplier(sys, T, delta)
    return dispersive_multiplier(sys, T, delta)


def _log_g(sys, n, y, cfg):
    """log g_n(y - lambda_n) = log Phi_n(-y) + log H_beta(y)."""
    m, s = h_beta_scaled(cfg, y)
    with np.errstate(divide="ignore"):
        return log_product(product_roots(sys, n), -y) + np.log(m.astype(complex)) + s


def _log_h(sys, n, x, cfg, c):
    lam = sys.eigenvalue(n)
    dm, ds = h_beta_scaled(cfg, 1j * lam * c)
    den = float(dm.real)
    if not (den > 0 and np.isfinite(ds)):
        raise DivisionDegenerate(f"H_beta(i lambda_{n} c) is not a positive finite number")
    m, s = h_beta_scaled(cfg, c * np.asarray(x, float))
    with np.errstate(divide="ignore"):
        return (log_product(product_roots(sys, n), -1j * np.asarray(x) - lam)
                + np.log(m.astype(complex)) + s - math.log(den) - float(ds))


def _exp(logv):
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        out = np.exp(logv)
    return np.where(np.isneginf(logv.real), 0.0, out)


def g_n(sys: SpectralSystem, n: int, x, T: float, delta: float):
    """Dispersive frequency function at real x."""
    cfg = dispersive_multiplier(sys, T, delta)
    x = np.asarray(x, float)
    return _exp(_log_g(sys, n, x + sys.eigenvalue(n), cfg))


def h_n(sys: SpectralSystem, n: int, x, T: float, delta: float):
    """Parabolic frequency function at real x."""
    cfg = parabolic_multiplier(sys, T, delta)
    return _exp(_log_h(sys, n, x, cfg, parabolic_scale(sys.alpha)))


@dataclass
class SampledFunction:
    time_grid: np.ndarray
    values: np.ndarray
    x_cutoff: float
    tail_bound: float
    dx: float


def _probe_tail(vals_fn, X, n_probe=64):
    """Fit c = max |F(y)| (1 + y^2) on [X, 2X] (both signs) and bound the tail beyond X."""
    y = np.linspace(X, 2 * X, n_probe)
    y = np.concatenate([-y, y])
    v = np.abs(vals_fn(y))
    c = np.max(v * (1 + y * y), axis=-1)
    return c * (math.pi - 2 * math.atan(X)) / (2 * math.pi)


def _fourier_sum(ghat, y, dx, t, chunk=1 << 22):
    """(dx/2pi) sum_j ghat[..., j] exp(i y_j t) for every t; ghat may be 2-D (rows = functions)."""
    ghat = np.atleast_2d(ghat)
    t = np.asarray(t, float)
    out = np.zeros((ghat.shape[0], t.size), complex)
    step = max(1, chunk // max(1, y.size))
    for i in range(0, t.size, step):
        E = np.exp(1j * np.outer(y, t[i:i + step]))
        out[:, i:i + step] = ghat @ E
    return out * (dx / (2 * math.pi))


def invert_to_time(fn_freq, T: float, tol: float = 1e-10, center: float = 0.0, n_time: int = 1025,
                   time_grid=None, x_start: float = 64.0, x_max: float = X_MAX) -> SampledFunction:
    """Inverse transform of a frequency function whose inverse lives in [-T/2, T/2].

    ``fn_freq`` maps real x (array) to complex values.  The cutoff X around
    ``center`` doubles until the fitted quadratic-decay tail is below ``tol``;
    TailNotBounded is raised beyond ``x_max``.
    """
    if T <= 0 or tol <= 0:
        raise DomainError("need T > 0 and tol > 0")
    dx = math.pi / T
    X = max(x_start, 4 * dx)
    shifted = lambda y: fn_freq(np.asarray(y) + center)
    while True:
        tail = float(_probe_tail(shifted, X))
        if tail <= tol:
            break
        X *= 2
        if X > x_max:
            raise TailNotBounded(f"frequency tail {tail:.3e} still above tol={tol:g} at cutoff {x_max:g}")
    J = int(math.ceil(X / dx))
    y = dx * np.arange(-J, J + 1)
    t = np.linspace(-T / 2, T / 2, n_time) if time_grid is None else np.asarray(time_grid, float)
    vals = _fourier_sum(shifted(y), y, dx, t)[0] * np.exp(1j * center * t)
    return SampledFunction(t, vals, X, tail, dx)


@dataclass
class BiorthogonalFamily:
    """Time samples of the family on a uniform grid over [-T/2, T/2].

    ``samples[i]`` belongs to the mode at position i of ``sys``.  ``ghat``
    holds the frequency values on ``y_grid`` so the family can be evaluated
    on other time grids (up to |t| <= T without aliasing).
    """

    sys: SpectralSystem
    T: float
    delta: float
    config: MultiplierConfig
    time_grid: np.ndarray
    samples: np.ndarray
    x_cutoff: float
    tail_bound: float
    dx: float
    y_grid: np.ndarray = field(repr=False)
    ghat: np.ndarray = field(repr=False)
    centers: np.ndarray = field(repr=False)

    @property
    def kind(self) -> Kind:
        return self.sys.kind

    def evaluate(self, t):
        t = np.asarray(t, float)
        out = _fourier_sum(self.ghat, self.y_grid, self.dx, t)
        return out * np.exp(1j * np.outer(self.centers, t))

    def to_csv(self, position: int) -> str:
        """Rows (t, re, im) of the family member stored at ``position``."""
        f = self.samples[position]
        n = int(self.sys.indices[position])
        return rows_to_csv(("t", "re", "im"), zip(self.time_grid, f.real, f.imag),
                           {"mode": n, "T": repr(float(self.T)), "delta": repr(float(self.delta)),
                            "x_cutoff": repr(float(self.x_cutoff))})

    def weights(self):
        """Exponentials exp(mu_k' t) paired with the family in the biorthogonality relation."""
        t = self.time_grid
        if self.kind is Kind.PARABOLIC:
            return np.exp(np.outer(self.sys.lambdas, t))
        return np.exp(1j * np.outer(self.sys.lambdas, t))


def _family_ghat(sys, cfg, y):
    """Rows: frequency values of every mode on the common grid y (shifted to each mode's center)."""
    if sys.kind is Kind.PARABOLIC:
        c = parabolic_scale(sys.alpha)
        return np.array([_exp(_log_h(sys, n, y, cfg, c)) for n in sys.indices])
    return np.array([_exp(_log_g(sys, n, y, cfg)) for n in sys.indices])


def default_time_points(sys, T, y, ghat, per_period=16):
    """Odd grid size resolving the significant band of the family.

    The controls carry frequencies up to max|lambda| plus the width of the
    frequency functions (where they exceed 1e-12 of their peak); cubic
    product integration of the closed loop wants ``per_period`` samples per
    period of that band.
    """
    mags = np.max(np.abs(ghat), axis=0)
    sig = np.nonzero(mags > 1e-12 * mags.max())[0]
    band = float(np.max(np.abs(y[sig]))) + float(np.max(np.abs(sys.lambdas)))
    n = max(257, int(math.ceil(T * band / (2 * math.pi) * per_period)) + 1)
    return n + (n + 1) % 2  # odd, so t = 0 is a node


def synthesize_family(sys: SpectralSystem, T: float, delta: float = 0.05, tol: float = 1e-10,
                      n_time: int | None = None, x_max: float = X_MAX) -> BiorthogonalFamily:
    """Build the time-domain family for every stored mode.

    The frequency cutoff is shared by all modes and doubled until the fitted
    tail of every mode is below ``tol``.  Without ``n_time`` the time step is
    chosen by ``default_time_points``.
    """
    cfg = multiplier_for(sys, T, delta)
    dx = math.pi / T
    X = max(64.0, 4 * dx)
    fn = lambda y: _family_ghat(sys, cfg, y)
    while True:
        tail = float(np.max(_probe_tail(fn, X)))
        if tail <= tol:
            break
        X *= 2
        if X > x_max:
            raise TailNotBounded(f"frequency tail {tail:.3e} still above tol={tol:g} at cutoff {x_max:g}")
    J = int(math.ceil(X / dx))
    y = dx * np.arange(-J, J + 1)
    ghat = fn(y)
    if n_time is None:
        n_time = default_time_points(sys, T, y, ghat)
    t = np.linspace(-T / 2, T / 2, n_time)
    centers = (-sys.lambdas if sys.kind is Kind.DISPERSIVE else np.zeros(sys.size)).astype(float)
    samples = _fourier_sum(ghat, y, dx, t) * np.exp(1j * np.outer(centers, t))
    return BiorthogonalFamily(sys, T, delta, cfg, t, samples, X, tail, dx, y, ghat, centers)


def biorthogonality_matrix(family: BiorthogonalFamily) -> np.ndarray:
    """M[n, k] = trapezoid integral of f_n(t) * exp(mu_k' t) over [-T/2, T/2]."""
    W = family.weights()
    return np.trapezoid(family.samples[:, None, :] * W[None, :, :], family.time_grid, axis=-1)


def _control_weights(sys, T):
    """d_k with u = sum_k a_k d_k f_k(t - T/2)."""
    if sys.kind is Kind.PARABOLIC:
        return -np.exp(-T * sys.lambdas / 2) / sys.bs
    return -np.exp(-1j * T * sys.lambdas / 2) / sys.bs


def synthesize_control(sys: SpectralSystem, y0, T: float, delta: float = 0.05,
                       family: BiorthogonalFamily | None = None, **kw) -> ControlSignal:
    """Null control ``u(t) = sum_k a_k d_k f_k(t - T/2)`` on a grid over [0, T]."""
    a = y0.coeffs if isinstance(y0, ModalState) else np.asarray(y0, complex)
    if a.size != sys.size:
        raise DomainError("initial state does not match the number of stored modes")
    if family is None:
        family = synthesize_family(sys, T, delta, **kw)
    u = (a * _control_weights(sys, T)) @ family.samples
    return ControlSignal(T, family.time_grid + T / 2, u, label="biorthogonal",
                         meta={"x_cutoff": family.x_cutoff, "tail_bound": family.tail_bound})


def predicted_residual(family: BiorthogonalFamily, y0) -> np.ndarray:
    """Final state implied by the quadrature biorthogonality matrix."""
    sys, T = family.sys, family.T
    a = y0.coeffs if isinstance(y0, ModalState) else np.asarray(y0, complex)
    M = biorthogonality_matrix(family)
    mu = sys.mus
    coef = a * _control_weights(sys, T)  # per source mode j
    moments = np.exp(mu * T / 2) * (coef @ M)  # int_0^T e^{mu_k s} u(s) ds
    return np.exp(-mu * T) * (a + sys.bs * moments)


def family_gram(family: BiorthogonalFamily) -> np.ndarray:
    f = family.samples
    return np.trapezoid(np.conj(f)[:, None, :] * f[None, :, :], family.time_grid, axis=-1)


def biorthogonal_cost_estimate(sys: SpectralSystem, T: float, delta: float = 0.05,
                               family: BiorthogonalFamily | None = None, **kw) -> float:
    """sup over unit y0 of the biorthogonal control norm."""
    if family is None:
        family = synthesize_family(sys, T, delta, **kw)
    d = _control_weights(sys, T)
    A = np.conj(d)[:, None] * family_gram(family) * d[None, :]
    A = 0.5 * (A + A.conj().T)
    return float(math.sqrt(max(0.0, np.linalg.eigvalsh(A).max())))
