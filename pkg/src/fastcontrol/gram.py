"""Exact moment problem of the truncated system via its Gram matrix.

With ``phi_k(s) = exp(-mu_k s)`` on (0, T) the Gram matrix is

    G[j, k] = int_0^T conj(phi_j) phi_k ds
            = (1 - exp(-(lambda_j + lambda_k) T)) / (lambda_j + lambda_k)         (parabolic)
            = (exp(i(lambda_j - lambda_k) T) - 1) / (i (lambda_j - lambda_k)),  G[k, k] = T (dispersive).

The null-control moment conditions ``int_0^T u(s) exp(mu_k s) ds = -a_k / b_k``
become, after reversing time, ``conj(G) p = r`` with ``r_k = -exp(-mu_k T) a_k / b_k``
and the minimal-norm control is ``u(s) = sum_j p_j exp(-conj(mu_j) (T - s))``.
All linear algebra runs in mpmath at the requested precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .errors import DomainError, PrecisionInsufficient
from .reports import FitReport, linear_fit
from .signals import ControlSignal, ExponentialSum, ModalState
from .spectral import Kind, PrecisionContext, SpectralSystem

DEFAULT_DIGITS = {Kind.PARABOLIC: 64, Kind.DISPERSIVE: 30}


def _mu_mp(sys):
    if sys.kind is Kind.PARABOLIC:
        return [mp.mpc(float(l), 0) for l in sys.lambdas]
    return [mp.mpc(0, float(l)) for l in sys.lambdas]


def _b_mp(sys):
    return [mp.mpc(b.real, b.imag) for b in sys.bs]


def _pivoted_ldl(G):
    """Symmetric-pivoted LDL^* of a Hermitian positive definite mp.matrix.

    Returns (perm, L, d) with G[perm][:, perm] = L diag(d) L^*.
    """
    n = G.rows
    A = G.copy()
    perm = list(range(n))
    L = mp.zeros(n, n)
    d = [mp.mpf(0)] * n
    for k in range(n):
        piv = max(range(k, n), key=lambda i: mp.re(A[i, i]))
        if piv != k:
            perm[k], perm[piv] = perm[piv], perm[k]
            for j in range(n):
                A[k, j], A[piv, j] = A[piv, j], A[k, j]
            for j in range(n):
                A[j, k], A[j, piv] = A[j, piv], A[j, k]
            for j in range(k):
                L[k, j], L[piv, j] = L[piv, j], L[k, j]
        dk = mp.re(A[k, k])
        if dk <= 0:
            raise PrecisionInsufficient("Gram matrix lost positive definiteness during factorisation")
        d[k] = dk
        L[k, k] = 1
        for i in range(k + 1, n):
            L[i, k] = A[i, k] / dk
        for i in range(k + 1, n):
            for j in range(k + 1, i + 1):
                A[i, j] -= L[i, k] * dk * mp.conj(L[j, k])
                A[j, i] = mp.conj(A[i, j])
    return perm, L, d


@dataclass
class GramSystem:
    sys: SpectralSystem
    T: mp.mpf
    G: mp.matrix
    precision: PrecisionContext
    condition: mp.mpf
    perm: list = field(repr=False)
    L: mp.matrix = field(repr=False)
    d: list = field(repr=False)
    _inv: mp.matrix = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.G.rows

    def solve(self, rhs):
        """G x = rhs using the cached pivoted factorisation."""
        with self.precision.workdps():
            n = self.size
            b = [rhs[self.perm[i]] for i in range(n)]
            y = [mp.mpc(0)] * n
            for i in range(n):
                y[i] = b[i] - mp.fsum(self.L[i, j] * y[j] for j in range(i))
            z = [y[i] / self.d[i] for i in range(n)]
            x = [mp.mpc(0)] * n
            for i in reversed(range(n)):
                x[i] = z[i] - mp.fsum(mp.conj(self.L[j, i]) * x[j] for j in range(i + 1, n))
            out = [mp.mpc(0)] * n
            for i in range(n):
                out[self.perm[i]] = x[i]
            return out

    def inverse(self) -> mp.matrix:
        if self._inv is None:
            with self.precision.workdps():
                n = self.size
                inv = mp.matrix(n, n)
                for k in range(n):
                    e = [mp.mpc(0)] * n
                    e[k] = mp.mpc(1)
                    col = self.solve(e)
                    for i in range(n):
                        inv[i, k] = col[i]
                self._inv = inv
        return self._inv


def _entries(sys, T):
    mu = _mu_mp(sys)
    n = len(mu)
    G = mp.matrix(n, n)
    for j in range(n):
        for k in range(n):
            s = mp.conj(mu[j]) + mu[k]
            G[j, k] = T if s == 0 else -mp.expm1(-s * T) / s
    return G


def _hermitian_eigs(G):
    if all(mp.im(G[i, j]) == 0 for i in range(G.rows) for j in range(G.cols)):
        return mp.eigsy(mp.matrix([[mp.re(G[i, j]) for j in range(G.cols)] for i in range(G.rows)]),
                        eigvals_only=True)
    return mp.eighe(G, eigvals_only=True)


def gram_matrix(sys: SpectralSystem, T: float, precision: PrecisionContext | int | None = None) -> GramSystem:
    """Assemble and factor G; PrecisionInsufficient when cond(G) > 10^(digits - 10)."""
    if T <= 0:
        raise DomainError("T must be positive")
    if precision is None:
        precision = PrecisionContext(DEFAULT_DIGITS[sys.kind])
    elif isinstance(precision, int):
        precision = PrecisionContext(precision)
    with precision.workdps():
        Tm = mp.mpf(T)
        G = _entries(sys, Tm)
        ev = _hermitian_eigs(G)
        lo, hi = min(ev), max(ev)
        if lo <= 0:
            raise PrecisionInsufficient(
                f"Gram matrix is not numerically positive definite at {precision.digits} digits",
                condition=mp.inf, digits=precision.digits)
        cond = hi / lo
        limit = mp.mpf(10) ** (precision.digits - 10)
        if cond > limit:
            raise PrecisionInsufficient(
                f"cond(G) = {mp.nstr(cond, 5)} exceeds 10^{precision.digits - 10}; "
                f"about {int(mp.log10(cond)) + 12} digits are needed",
                condition=float(mp.log10(cond)), digits=precision.digits)
        perm, L, d = _pivoted_ldl(G)
    return GramSystem(sys, Tm, G, precision, cond, perm, L, d)


def required_digits(sys: SpectralSystem, T: float, start: int = 30, ceiling: int = 2000) -> int:
    """Smallest precision (in steps of 10 from ``start``) accepted by gram_matrix."""
    digits = start
    while digits <= ceiling:
        try:
            gram_matrix(sys, T, digits)
            return digits
        except PrecisionInsufficient as exc:
            need = int(exc.condition) + 12 if exc.condition not in (None, mp.inf) else digits + 20
            digits = max(digits + 10, need)
    raise PrecisionInsufficient(f"more than {ceiling} digits would be needed", digits=ceiling)


def _moment_rhs(gs: GramSystem, a):
    sys = gs.sys
    with gs.precision.workdps():
        mu, b = _mu_mp(sys), _b_mp(sys)
        return [-mp.exp(-mu[k] * gs.T) * mp.mpc(a[k].real, a[k].imag) / b[k] for k in range(sys.size)]


def minimal_norm_control(gs: GramSystem, y0, n_time: int = 2001):
    """Minimal L2 control steering y0 to 0 at T; returns (ControlSignal, exact norm)."""
    sys = gs.sys
    a = y0.coeffs if isinstance(y0, ModalState) else np.asarray(y0, complex)
    if a.size != sys.size:
        raise DomainError("initial state does not match the number of stored modes")
    with gs.precision.workdps():
        r = _moment_rhs(gs, a)
        q = gs.solve([mp.conj(v) for v in r])
        p = [mp.conj(v) for v in q]
        norm2 = mp.re(mp.fsum(mp.conj(pk) * rk for pk, rk in zip(p, r)))
        rates = [mp.conj(m) for m in _mu_mp(sys)]
        exact = ExponentialSum(rates, p, gs.T, gs.precision.digits)
        norm = mp.sqrt(max(norm2, mp.mpf(0)))
    t = np.linspace(0.0, float(gs.T), n_time)
    u = ControlSignal(float(gs.T), t, exact(t), exact=exact, label="minimal-norm")
    return u, norm


def _cost_operator(gs: GramSystem):
    """D^* conj(G)^{-1} D with D = diag(-exp(-mu_k T) / b_k)."""
    sys = gs.sys
    with gs.precision.workdps():
        mu, b = _mu_mp(sys), _b_mp(sys)
        D = [-mp.exp(-mu[k] * gs.T) / b[k] for k in range(sys.size)]
        Ginv = gs.inverse()
        n = sys.size
        A = mp.matrix(n, n)
        for j in range(n):
            for k in range(n):
                A[j, k] = mp.conj(D[j]) * mp.conj(Ginv[j, k]) * D[k]
        return A


def truncated_cost(gs: GramSystem) -> mp.mpf:
    """C_T^(N): sup over unit initial data of the minimal control norm."""
    with gs.precision.workdps():
        return mp.sqrt(max(_hermitian_eigs(_cost_operator(gs))))


def worst_case_state(gs: GramSystem) -> ModalState:
    """Unit initial state attaining the truncated cost."""
    with gs.precision.workdps():
        A = _cost_operator(gs)
        E, Q = mp.eighe(A)
        k = max(range(len(E)), key=lambda i: E[i])
        v = np.array([complex(Q[i, k]) for i in range(A.rows)])
    return ModalState(v / np.linalg.norm(v))


def distance_dm(gs: GramSystem, m: int) -> mp.mpf:
    """Distance of phi_m to the span of the other exponentials: 1/sqrt((G^-1)[m, m])."""
    pos = gs.sys.position(m)
    with gs.precision.workdps():
        return 1 / mp.sqrt(mp.re(gs.inverse()[pos, pos]))


def distance_dm_projection(gs: GramSystem, m: int) -> mp.mpf:
    """Same distance from the explicit projection: G_mm - g^* G_rest^{-1} g."""
    pos = gs.sys.position(m)
    with gs.precision.workdps():
        n = gs.size
        rest = [i for i in range(n) if i != pos]
        if not rest:
            return mp.sqrt(mp.re(gs.G[pos, pos]))
        Gr = mp.matrix([[gs.G[i, j] for j in rest] for i in rest])
        g = mp.matrix([gs.G[i, pos] for i in rest])
        x = mp.lu_solve(Gr, g)
        proj = mp.fsum(mp.conj(g[i]) * x[i] for i in range(len(rest)))
        return mp.sqrt(mp.re(gs.G[pos, pos] - proj))


def psi_norm(gs: GramSystem, m: int) -> mp.mpf:
    """Norm of the biorthogonal element of phi_m inside the span: 1/d_m."""
    return 1 / distance_dm(gs, m)


def lower_bound_cost(gs: GramSystem) -> mp.mpf:
    """max_m exp(-Re(mu_m) T) / (|b_m| d_m): the cost restricted to single-mode data."""
    sys = gs.sys
    with gs.precision.workdps():
        vals = []
        for n, lam, b in zip(sys.indices, sys.lambdas, sys.bs):
            decay = mp.exp(-mp.mpf(float(lam)) * gs.T) if sys.kind is Kind.PARABOLIC else mp.mpf(1)
            vals.append(decay / (abs(mp.mpc(b.real, b.imag)) * distance_dm(gs, int(n))))
        return max(vals)


# --- small-time asymptotics -------------------------------------------------

def theorem_rate_constant(alpha: float, kind: Kind | str, two_sided: bool = False) -> float:
    """Constant K in the upper bound C_T <= C exp(K / (R T)^(1/(alpha-1)))."""
    kind = Kind(kind)
    e = alpha / (alpha - 1)
    pi_e = math.pi ** e
    if kind is Kind.PARABOLIC:
        return 3 * 2 ** (1 / (alpha - 1)) * pi_e / (4 * (2 * math.sin(math.pi / (2 * alpha))) ** e)
    if two_sided:
        return 3 * 2 ** ((alpha + 1) / (alpha - 1)) * pi_e / (4 * math.sin(math.pi / alpha) ** e)
    return 3 * 2 ** (1 / (alpha - 1)) * pi_e / (4 * math.sin(math.pi / alpha) ** e)


@dataclass
class SweepPoint:
    T: float
    cost: float
    lower: float
    log_cost: float
    log_lower: float
    condition_log10: float
    digits: int


def cost_sweep(sys: SpectralSystem, T_grid, precision: PrecisionContext | int | None = None):
    """Truncated cost and single-mode lower bound over a grid of horizons (sorted by T)."""
    out = []
    for T in sorted(float(t) for t in T_grid):
        gs = gram_matrix(sys, T, precision)
        with gs.precision.workdps():
            c, lo = truncated_cost(gs), lower_bound_cost(gs)
            out.append(SweepPoint(T, float(c), float(lo), float(mp.log(c)), float(mp.log(lo)),
                                  float(mp.log10(gs.condition)), gs.precision.digits))
    return out


def blowup_fit(points, alpha: float, rate: float = 1.0, which: str = "cost",
               exponent: float | None = None) -> FitReport:
    """Fit log(cost) against (R T)^(-e), e = 1/(alpha-1) unless given."""
    e = 1.0 / (alpha - 1.0) if exponent is None else exponent
    x = [(rate * p.T) ** (-e) for p in points]
    y = [p.log_cost if which == "cost" else p.log_lower for p in points]
    rep = linear_fit(x, y, f"log {which} vs (R T)^(-{e:.4g})")
    rep.extra["exponent"] = e
    return rep


# --- distance envelope --------------------------------------------------------

@dataclass
class EnvelopeReport:
    m: int
    C: float
    a: float
    rows: list
    max_ratio: float

    @property
    def holds(self) -> bool:
        return self.max_ratio <= 1.0


def _divided_difference_constants(sys: SpectralSystem, m: int, j_max: int):
    """K_j = prod_{r in S_j, r != m} |lambda_r - lambda_m| / (j! sqrt(2j+1)).

    S_j holds m and its j nearest neighbours in the spectrum; the j-th
    divided difference of exp(-mu t) over S_j gives d_m(T) <= K_j T^(j+1/2).
    """
    lam_m = sys.eigenvalue(m)
    d = np.sort(np.abs(np.delete(sys.lambdas, sys.position(m)) - lam_m))
    logs = []
    for j in range(0, j_max + 1):
        lp = float(np.sum(np.log(d[:j])))
        logs.append(lp - math.lgamma(j + 1) - 0.5 * math.log(2 * j + 1))
    return np.array(logs)


def envelope_log(C: float, a: float, alpha: float, T, j_max: int):
    """log min_{0<=j<=j_max} C sqrt(T) (j!)^(alpha-1) (a T)^j, with the minimising j."""
    T = np.atleast_1d(np.asarray(T, float))
    j = np.arange(j_max + 1)
    lg = np.array([math.lgamma(k + 1) for k in j])
    vals = (math.log(C) + 0.5 * np.log(T)[:, None] + (alpha - 1) * lg[None, :]
            + j[None, :] * np.log(a * T)[:, None])
    k = np.argmin(vals, axis=1)
    return vals[np.arange(T.size), k], j[k]


def dm_scaling_check(sys: SpectralSystem, T_grid, m: int = 1,
                     precision: PrecisionContext | int | None = None) -> EnvelopeReport:
    """Calibrate (C, a) at the largest T and test d_m(T) against the envelope elsewhere.

    C makes the j = 0 term exact at the calibration horizon; a is the
    smallest value for which every available divided-difference bound
    K_j T^(j+1/2), j <= N-1, lies under the envelope term of order j.
    """
    Ts = sorted((float(t) for t in T_grid), reverse=True)
    alpha = sys.alpha
    dms = []
    for T in Ts:
        gs = gram_matrix(sys, T, precision)
        with gs.precision.workdps():
            dms.append(float(distance_dm(gs, m)))
    C = dms[0] / math.sqrt(Ts[0])
    j_max = sys.size - 1
    logK = _divided_difference_constants(sys, m, j_max)
    lg = np.array([math.lgamma(k + 1) for k in range(j_max + 1)])
    a = max(math.exp((logK[j] - math.log(C) - (alpha - 1) * lg[j]) / j) for j in range(1, j_max + 1)) \
        if j_max >= 1 else 1.0
    rows = []
    worst = -math.inf
    for T, dm in zip(Ts, dms):
        le, jopt = envelope_log(C, a, alpha, T, j_max)
        ratio = math.exp(math.log(dm) - float(le[0]))
        rows.append((T, dm, math.exp(float(le[0])), int(jopt[0]), ratio))
        if T != Ts[0]:
            worst = max(worst, ratio)
    return EnvelopeReport(m, C, a, rows, worst if len(Ts) > 1 else 0.0)


def envelope_shape_exponent(C: float, a: float, alpha: float, T_grid=None, j_max: int = 100000) -> FitReport:
    """Slope of log(-log(E/(C sqrt T))) against log(1/T) for the unrestricted envelope.

    For small a*T the optimal j is about (a T)^(-1/(alpha-1)) and the slope
    approaches 1/(alpha-1).  The default grid puts the optimal j between
    100 and 10^4, where the logarithmic corrections are small.
    """
    if T_grid is None:
        T_grid = np.geomspace(1e4 ** -(alpha - 1), 1e2 ** -(alpha - 1), 25) / a
    T = np.asarray(sorted(T_grid), float)
    if np.any(a * T >= 1):
        raise DomainError("the envelope shape is only defined for a*T < 1")
    le, _ = envelope_log(C, a, alpha, T, j_max)
    depth = -(le - math.log(C) - 0.5 * np.log(T))
    return linear_fit(np.log(1 / T), np.log(depth), "log depth vs log(1/T)")
