"""Canonical products vanishing at the shifted spectrum and their growth checks.

For a mode ``n`` the product is

    Phi_n(z) = prod_{k != n} (1 - z / (lambda_k - lambda_n)),

an entire function of order ``1/alpha`` vanishing at ``lambda_k - lambda_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError
from .reports import BoundReport, calibrate_validate
from .spectral import SpectralSystem


@dataclass
class ProductEval:
    value: complex | np.ndarray
    log_abs: float | np.ndarray
    truncation_index: int
    tail_bound: float | np.ndarray


@dataclass
class CountingProfile:
    s: np.ndarray
    counts: np.ndarray
    model: np.ndarray
    max_excess: float


def counting_function(sys: SpectralSystem, n: int, s):
    """#{k != n : |lambda_k - lambda_n| <= s} over the stored modes."""
    lam_n = sys.eigenvalue(n)
    d = np.sort(np.abs(np.delete(sys.lambdas, sys.position(n)) - lam_n))
    s = np.asarray(s, float)
    if np.any(s < 0):
        raise DomainError("counting radius must be non-negative")
    out = np.searchsorted(d, s, side="right")
    return int(out) if out.ndim == 0 else out


def counting_model(sys: SpectralSystem, s):
    """Leading-order count ``(s/R)^(1/alpha)`` per side of the spectrum."""
    sides = 2 if sys.two_sided else 1
    return sides * (np.asarray(s, float) / sys.rate) ** (1.0 / sys.alpha)


def counting_profile(sys: SpectralSystem, n: int, s) -> CountingProfile:
    s = np.asarray(s, float)
    counts = np.asarray(counting_function(sys, n, s))
    model = counting_model(sys, s)
    return CountingProfile(s, counts, model, float(np.max(counts - model)))


def _differences(sys, n):
    pos = sys.position(n)
    d = np.delete(sys.lambdas, pos) - sys.lambdas[pos]
    k = np.delete(sys.indices, pos)
    return d, k


def _ideal_tail(sys, n, K, absz):
    """Upper estimate of sum_{|k|>K} |z|/|lambda_k - lambda_n| over the model spectrum.

    Stored modes beyond K use their actual eigenvalues; modes beyond the
    stored range use ``lambda_k ~ R |k|^alpha`` and an integral bound.
    """
    lam_n = abs(sys.eigenvalue(n))
    d, k = _differences(sys, n)
    stored = np.abs(d[np.abs(k) > K])
    s = float(np.sum(1.0 / stored)) if stored.size else 0.0
    N = int(np.max(np.abs(sys.indices)))
    start = max(N, K)
    R, a = sys.rate, sys.alpha
    if R * start**a <= lam_n:
        return math.inf
    # sum_{k>start} 1/(R k^a - lam_n) <= int_start^inf dk/(R k^a - lam_n)
    tail = start ** (1 - a) / (R * (a - 1)) / (1 - lam_n / (R * start**a))
    sides = 2 if sys.two_sided else 1
    return np.asarray(absz) * (s + sides * tail)


def log_product(roots, z):
    """sum_k log(1 - z/roots_k) (complex, any branch); -inf real part at a root."""
    roots = np.asarray(roots, float)
    z = np.asarray(z, complex)
    flat = z.ravel()
    out = np.zeros(flat.shape, complex)
    chunk = max(1, 2_000_000 // max(1, roots.size))
    for i in range(0, flat.size, chunk):
        with np.errstate(divide="ignore", invalid="ignore"):
            # (r - z)/r split into real divisions: exactly 0 at a root and 1 at z = 0
            zc = flat[i:i + chunk, None]
            ratio = (roots[None, :] - zc.real) / roots[None, :] - 1j * (zc.imag / roots[None, :])
            out[i:i + chunk] = np.log(ratio).sum(axis=1)
    return out.reshape(z.shape)


def product_roots(sys: SpectralSystem, n: int) -> np.ndarray:
    """Zeros lambda_k - lambda_n (k != n) of the canonical product over stored modes."""
    return _differences(sys, n)[0]


def phi_n(sys: SpectralSystem, n: int, z, tol: float | None = None) -> ProductEval:
    """Evaluate the canonical product at ``z`` (scalar or array).

    With ``tol=None`` every stored mode enters the product (the product of the
    truncated system) and ``tail_bound`` estimates what the omitted ideal
    modes would contribute to ``log|Phi_n|``.  With a tolerance the product
    runs over ``|k| <= K`` for the smallest K whose estimated log-tail (with
    a safety factor 2) is below ``tol``; TruncationError is raised when K
    exceeds the stored range.
    """
    z_arr = np.asarray(z, complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    d, k = _differences(sys, n)
    absz = float(np.max(np.abs(z_arr))) if z_arr.size else 0.0
    N = int(np.max(np.abs(sys.indices)))
    if tol is None:
        K = N
    else:
        if tol <= 0:
            raise DomainError("tolerance must be positive")
        K = None
        for cand in range(1, N + 1):
            if 2.0 * _ideal_tail(sys, n, cand, absz) <= tol:
                K = cand
                break
        if K is None:
            # estimate how far the model spectrum would have to extend
            R, a = sys.rate, sys.alpha
            sides = 2 if sys.two_sided else 1
            need = (2.0 * sides * absz / (tol * R * (a - 1))) ** (1.0 / (a - 1))
            raise TruncationError(
                f"log-tail {2 * _ideal_tail(sys, n, N, absz):.3e} exceeds tol={tol:g} with "
                f"{N} stored modes; about K={int(math.ceil(need))} modes are required",
                required_index=int(math.ceil(need)),
            )
    logs = log_product(d[np.abs(k) <= K], z_arr)
    log_abs = logs.real
    with np.errstate(over="ignore", invalid="ignore"):
        value = np.where(np.isneginf(log_abs), 0.0, np.exp(logs))
    tail = _ideal_tail(sys, n, K, np.abs(z_arr))
    if scalar:
        return ProductEval(complex(value[0]), float(log_abs[0]), K, float(np.asarray(tail).ravel()[0]))
    return ProductEval(value, log_abs, K, tail)


def leading_constant(sys: SpectralSystem, mode: str) -> float:
    """Exponential-type constant c in ``log|Phi_n| <= c |z|^(1/alpha) + O(log|z|)``.

    ``mode`` is ``"complex"`` (one-sided, any z), ``"line"`` (one-sided, along
    ``z = -i x - lambda_n``, measured in ``|x|``) or ``"two-sided"``.
    """
    a, scale = sys.alpha, sys.rate ** (1.0 / sys.alpha)
    if mode == "complex":
        return math.pi / (scale * math.sin(math.pi / a))
    if mode == "line":
        return math.pi / (2 * scale * math.sin(math.pi / (2 * a)))
    if mode == "two-sided":
        return 2 * math.pi / (scale * math.sin(math.pi / a))
    raise DomainError(f"unknown growth mode {mode!r}")


def phi_growth_report(sys: SpectralSystem, n: int, grid, mode: str | None = None) -> BoundReport:
    """Check ``log|Phi_n(z)| - c|z|^(1/alpha) <= c0 + d log(1+|z|)``.

    The envelope is fitted on the half of ``grid`` with smaller modulus and
    tested on the other half.  For ``mode="line"`` the grid holds real x and
    the product is evaluated at ``-i x - lambda_n``.
    """
    if mode is None:
        mode = "two-sided" if sys.two_sided else "complex"
    grid = np.asarray(grid)
    c = leading_constant(sys, mode)
    if mode == "line":
        x = grid.real.astype(float)
        z = -1j * x - sys.eigenvalue(n)
        absz = np.abs(x)
    else:
        z = grid.astype(complex)
        absz = np.abs(z)
    ev = phi_n(sys, n, z)
    slack = ev.log_abs - c * absz ** (1.0 / sys.alpha)
    return calibrate_validate(f"product growth ({mode})", absz, ev.log_abs, slack)
