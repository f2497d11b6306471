"""Forward simulation of the modal system under a control.

Each mode obeys ``y_k' = -mu_k y_k + b_k u`` so

    y_k(t) = exp(-mu_k t) a_k + b_k int_0^t exp(-mu_k (t - s)) u(s) ds.

Sampled controls are integrated by product integration: u is replaced by
its local polynomial interpolant (cubic by default) on every grid interval
and the exponential kernel is integrated exactly against it.  Controls with an exact
exponential-sum form are propagated in closed form at their own precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DomainError, GridMismatch
from .signals import ControlSignal, ModalState
from .spectral import Kind, SpectralSystem


def _shifted_moments(z, order=3):
    """m_j(z) = int_0^1 tau^j exp(z (tau - 1)) dtau for j = 0..order (array z)."""
    z = np.asarray(z, complex)
    out = np.empty((order + 1,) + z.shape, complex)
    # the upward recurrence loses about j!/|z|^j, so small |z| goes through the series
    small = np.abs(z) < order + 1
    zs = z[small]
    if zs.size:
        # exp(-z) * sum_k z^k / (k! (j + k + 1))
        ez = np.exp(-zs)
        for j in range(order + 1):
            term = np.ones_like(zs)
            acc = term / (j + 1)
            for k in range(1, 60):
                term = term * zs / k
                acc = acc + term / (j + k + 1)
            out[j][small] = ez * acc
    zl = z[~small]
    if zl.size:
        m = -np.expm1(-zl) / zl
        out[0][~small] = m
        for j in range(1, order + 1):
            m = (1.0 - j * m) / zl
            out[j][~small] = m
    return out


def _lagrange_monomials(offsets):
    """Monomial coefficients (ascending) of the Lagrange basis on ``offsets``."""
    offsets = np.asarray(offsets, float)
    rows = []
    for q, oq in enumerate(offsets):
        others = np.delete(offsets, q)
        poly = np.poly(others)[::-1] / np.prod(oq - others)
        rows.append(poly)
    return np.array(rows)  # rows = basis, cols = power


def _stencil_starts(n_int, order):
    """First sample index of the (order+1)-point stencil used on each interval.

    The stencil is centred on the interval and shifted inwards at the ends.
    """
    i = np.arange(n_int)
    return np.clip(i - (order - 1) // 2, 0, n_int - order)


def _check_grid(u: ControlSignal, T: float, order: int):
    if abs(u.T - T) > 1e-12 * max(1.0, T):
        raise GridMismatch(f"control horizon {u.T} does not match T={T}")
    if u.time_grid.size < order + 1:
        raise GridMismatch(f"product integration of order {order} needs at least {order + 1} samples")


def _convolve_samples(sys, u_vals, h, n_int, order=3):
    """int_0^{n_int h} exp(-mu_k (t_end - s)) u(s) ds for every mode, with t_end = n_int*h.

    u is replaced on every interval by its degree-``order`` Lagrange
    interpolant and the exponential kernel is integrated exactly against it.
    """
    if order < 1 or order % 2 == 0:
        raise DomainError("interpolation order must be odd and positive")
    mu = sys.mus
    m = _shifted_moments(mu * h, order)  # (order+1, K)
    right = h * np.arange(1, n_int + 1)
    decay = np.exp(-np.outer(mu, right[-1] - right))  # (K, n_int)
    u = np.asarray(u_vals[: n_int + 1])
    starts = _stencil_starts(n_int, order)
    rel = starts - np.arange(n_int)
    total = np.zeros(sys.size, complex)
    for r in np.unique(rel):
        W = _lagrange_monomials(r + np.arange(order + 1)) @ m  # (order+1, K)
        idx = np.nonzero(rel == r)[0]
        stack = np.stack([u[idx + r + q] for q in range(order + 1)])  # (order+1, n)
        total += np.einsum("qk,kn,qn->k", W, decay[:, idx], stack)
    return h * total


def _exact_final(sys, a, exact, t_end):
    """Closed-form state at t_end for u(s) = sum_j c_j exp(rho_j (s - T))."""
    with mp.workdps(exact.digits):
        T = exact.T
        t = mp.mpf(t_end) if not isinstance(t_end, mp.mpf) else t_end
        if sys.kind is Kind.PARABOLIC:
            mus = [mp.mpf(float(l)) for l in sys.lambdas]
        else:
            mus = [mp.mpc(0, float(l)) for l in sys.lambdas]
        out = []
        for k, mu in enumerate(mus):
            acc = mp.exp(-mu * t) * mp.mpc(a[k].real, a[k].imag)
            b = mp.mpc(sys.bs[k].real, sys.bs[k].imag)
            s = mp.mpc(0)
            for rho, c in zip(exact.rates, exact.coeffs):
                w = mu + rho
                if abs(w) == 0:
                    integral = t
                else:
                    integral = -mp.expm1(-w * t) / w
                s += c * mp.exp(rho * (t - T)) * integral
            out.append(acc + b * s)
        return out


def forward_simulate(sys: SpectralSystem, y0, u: ControlSignal, T: float | None = None,
                     method: str = "auto", order: int = 3) -> ModalState:
    """State at time T.  ``method`` is "auto", "exact" or "samples".

    ``order`` is the (odd) degree of the piecewise interpolant used for
    sampled controls.
    """
    a = y0.coeffs if isinstance(y0, ModalState) else np.asarray(y0, complex)
    if a.size != sys.size:
        raise DomainError("initial state does not match the number of stored modes")
    T = u.T if T is None else T
    if method not in ("auto", "exact", "samples"):
        raise DomainError(f"unknown simulation method {method!r}")
    if method == "exact" or (method == "auto" and u.exact is not None):
        if u.exact is None:
            raise DomainError("control has no exact representation")
        vals = _exact_final(sys, a, u.exact, T)
        return ModalState(np.array([complex(v) for v in vals]))
    _check_grid(u, T, order)
    n_int = u.time_grid.size - 1
    h = T / n_int
    forced = _convolve_samples(sys, u.values, h, n_int, order)
    return ModalState(np.exp(-sys.mus * T) * a + sys.bs * forced)


def final_state_mp(sys: SpectralSystem, y0, u: ControlSignal, T: float | None = None):
    """Exact-path final state as multiprecision numbers (no rounding to double)."""
    a = y0.coeffs if isinstance(y0, ModalState) else np.asarray(y0, complex)
    if u.exact is None:
        raise DomainError("control has no exact representation")
    return _exact_final(sys, a, u.exact, u.T if T is None else T)


def residual_norm(sys: SpectralSystem, y0, u: ControlSignal, T: float | None = None,
                  method: str = "auto", order: int = 3) -> float:
    """||y(T)|| / ||y0|| (just ||y(T)|| when y0 = 0)."""
    a = y0.coeffs if isinstance(y0, ModalState) else np.asarray(y0, complex)
    if method != "samples" and u.exact is not None:
        vals = final_state_mp(sys, a, u, T)
        with mp.workdps(u.exact.digits):
            num = float(mp.sqrt(mp.fsum(abs(v) ** 2 for v in vals)))
    else:
        num = forward_simulate(sys, a, u, T, method="samples", order=order).norm
    den = float(np.linalg.norm(a))
    return num / den if den > 0 else num


def trajectory_norms(sys: SpectralSystem, y0, u: ControlSignal, n_points: int = 21,
                     method: str = "auto", order: int = 3):
    """Rows (t, ||y(t)||) on ``n_points`` times spread over [0, T]."""
    a = y0.coeffs if isinstance(y0, ModalState) else np.asarray(y0, complex)
    rows = [(0.0, float(np.linalg.norm(a)))]
    n_int = u.time_grid.size - 1
    h = u.T / n_int
    marks = np.unique(np.linspace(0, n_int, n_points).round().astype(int))[1:]
    for m in marks:
        t = m * h
        if u.exact is not None and method != "samples":
            with mp.workdps(u.exact.digits):
                vals = _exact_final(sys, a, u.exact, mp.mpf(t))
                nrm = float(mp.sqrt(mp.fsum(abs(v) ** 2 for v in vals)))
        elif m >= order:
            forced = _convolve_samples(sys, u.values, h, m, order)
            nrm = float(np.linalg.norm(np.exp(-sys.mus * t) * a + sys.bs * forced))
        else:
            continue
        rows.append((float(t), nrm))
    return rows


@dataclass
class AdmissibilityEstimate:
    sampled_max: float
    supremum: float
    trials: int


def admissibility_quadratic_form(sys: SpectralSystem, T: float) -> np.ndarray:
    """Q with ||sum_k conj(b_k) z_k exp(-conj(mu_k) t)||^2_{L2(0,T)} = z* Q z."""
    mu = sys.mus
    s = mu[:, None] + np.conj(mu)[None, :]  # mu_j + conj(mu_k)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.where(np.abs(s) > 0, -np.expm1(-s * T) / np.where(s == 0, 1, s), T)
    # entry (j, k): b_j conj(b_k) int exp(-mu_j t) conj(exp(-mu_k t)) dt
    Q = sys.bs[:, None] * G * np.conj(sys.bs)[None, :]
    return 0.5 * (Q + Q.conj().T)


def admissibility_probe(sys: SpectralSystem, T: float, trials: int = 200, seed: int = 0) -> AdmissibilityEstimate:
    """Largest observed ratio over random unit z, together with the exact supremum."""
    if T <= 0 or trials < 1:
        raise DomainError("need T > 0 and trials >= 1")
    Q = admissibility_quadratic_form(sys, T)
    rng = np.random.default_rng(seed)
    best = -math.inf
    for _ in range(trials):
        z = rng.standard_normal(sys.size) + 1j * rng.standard_normal(sys.size)
        z /= np.linalg.norm(z)
        best = max(best, float(np.real(np.conj(z) @ Q @ z)))
    return AdmissibilityEstimate(best, float(np.linalg.eigvalsh(Q).max()), trials)
