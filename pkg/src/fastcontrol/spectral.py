"""Modal data of 1-D control systems: eigenvalues, control coefficients, generators."""
from __future__ import annotations

import contextlib
import enum
import json
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .errors import DomainError, GapViolation, UnknownIndex
from .reports import FitReport


class Kind(str, enum.Enum):
    PARABOLIC = "parabolic"
    DISPERSIVE = "dispersive"


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision (decimal digits) for the multiprecision paths."""

    digits: int = 30

    def __post_init__(self):
        if int(self.digits) < 15:
            raise DomainError(f"precision must be at least 15 digits, got {self.digits}")
        object.__setattr__(self, "digits", int(self.digits))

    def workdps(self):
        return mp.workdps(self.digits)

    @contextlib.contextmanager
    def active(self):
        with mp.workdps(self.digits):
            yield self


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralSystem:
    """Eigenvalues and control coefficients of a diagonalised system.

    Mode ``k`` evolves as ``y_k' = -mu_k y_k + b_k u`` with ``mu_k = lambda_k``
    (parabolic) or ``mu_k = i lambda_k`` (dispersive).  ``alpha`` and ``rate``
    describe the asymptotics ``lambda_n ~ rate * |n|**alpha``.
    """

    kind: Kind
    indices: np.ndarray
    lambdas: np.ndarray
    bs: np.ndarray
    alpha: float
    rate: float
    name: str = ""
    _pos: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        idx = _frozen(self.indices, np.int64)
        lam = _frozen(self.lambdas, float)
        bs = _frozen(self.bs, complex)
        if not (idx.shape == lam.shape == bs.shape) or idx.ndim != 1 or idx.size == 0:
            raise DomainError("indices, lambdas and bs must be 1-D arrays of equal length")
        if len(set(idx.tolist())) != idx.size or np.any(idx == 0):
            raise DomainError("mode indices must be distinct and nonzero")
        if not np.all(np.isfinite(lam)):
            raise DomainError("eigenvalues must be finite")
        if np.any(np.diff(lam) <= 0):
            raise GapViolation("eigenvalues must be strictly increasing along the stored order")
        if np.any(lam == 0):
            raise GapViolation("zero eigenvalue is not allowed")
        if kind is Kind.PARABOLIC and np.any(lam <= 0):
            raise DomainError("parabolic eigenvalues must be positive")
        if np.any(np.sign(lam) != np.sign(idx)):
            raise GapViolation("sign of each eigenvalue must match the sign of its index")
        if np.any(np.diff(idx) <= 0):
            raise DomainError("indices must be increasing along the stored order")
        mods = np.abs(bs)
        if not (np.all(np.isfinite(mods)) and mods.min() > 0):
            raise DomainError("control coefficients must be finite and nonzero")
        if not (self.alpha > 1 and self.rate > 0):
            raise DomainError("asymptotic exponent must exceed 1 and rate must be positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "bs", bs)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "_pos", {int(n): i for i, n in enumerate(idx)})

    @property
    def size(self) -> int:
        return int(self.indices.size)

    @property
    def two_sided(self) -> bool:
        return bool(np.any(self.indices < 0))

    @property
    def mus(self) -> np.ndarray:
        """Complex decay rates: lambda (parabolic) or i*lambda (dispersive)."""
        if self.kind is Kind.PARABOLIC:
            return self.lambdas.astype(complex)
        return 1j * self.lambdas

    def position(self, n: int) -> int:
        try:
            return self._pos[int(n)]
        except KeyError:
            raise UnknownIndex(f"mode index {n} is not stored (have {self.indices.min()}..{self.indices.max()})") from None

    def eigenvalue(self, n: int) -> float:
        return float(self.lambdas[self.position(n)])

    def control_coefficient(self, n: int) -> complex:
        return complex(self.bs[self.position(n)])

    def truncate(self, n_modes: int) -> "SpectralSystem":
        """Keep indices with |n| <= n_modes."""
        keep = np.abs(self.indices) <= n_modes
        return SpectralSystem(self.kind, self.indices[keep], self.lambdas[keep],
                              self.bs[keep], self.alpha, self.rate, self.name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "indices": [int(i) for i in self.indices],
            "lambdas": [float(v) for v in self.lambdas],
            "bs_re": [float(v) for v in self.bs.real],
            "bs_im": [float(v) for v in self.bs.imag],
            "alpha": self.alpha,
            "rate": self.rate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralSystem":
        bs = np.asarray(d["bs_re"], float) + 1j * np.asarray(d.get("bs_im", [0.0] * len(d["bs_re"])), float)
        return cls(Kind(d["kind"]), d["indices"], d["lambdas"], bs, d["alpha"], d["rate"], d.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> "SpectralSystem":
        return cls.from_dict(json.loads(text))


def _perturbations(n_modes, amplitude, rng):
    if amplitude < 0:
        raise DomainError("perturbation amplitude must be non-negative")
    if amplitude == 0:
        return np.zeros(n_modes)
    return rng.uniform(-amplitude, amplitude, n_modes)


def _check_regular(lam):
    gaps = np.diff(lam)
    if np.any(gaps <= 0):
        k = int(np.argmin(gaps))
        raise GapViolation(f"perturbation breaks the strict ordering near position {k + 1}: gap {gaps[k]:.3e}")


def make_power_law_spectrum(alpha: float, rate: float, n_modes: int, perturb_amplitude: float = 0.0,
                            seed: int = 0, kind: Kind | str = Kind.PARABOLIC, b=1.0) -> SpectralSystem:
    """One-sided family ``lambda_n = rate n^alpha + eps_n n^(alpha-1)``, n = 1..n_modes.

    ``eps_n`` is uniform in [-perturb_amplitude, perturb_amplitude] from a
    seeded generator; ``b`` is a constant control coefficient.
    """
    if alpha < 2:
        raise DomainError(f"power-law generator needs alpha >= 2, got {alpha}")
    if rate <= 0 or n_modes < 1:
        raise DomainError("rate must be positive and n_modes >= 1")
    n = np.arange(1, n_modes + 1, dtype=float)
    eps = _perturbations(n_modes, perturb_amplitude, np.random.default_rng(seed))
    lam = rate * n**alpha + eps * n ** (alpha - 1)
    _check_regular(lam)
    if np.any(lam <= 0):
        raise GapViolation("perturbation produced a non-positive eigenvalue")
    bs = np.full(n_modes, complex(b))
    return SpectralSystem(Kind(kind), np.arange(1, n_modes + 1), lam, bs, alpha, rate,
                          f"power-law alpha={alpha:g}")


def make_two_sided_spectrum(alpha: float, rate: float, n_modes: int, perturb_amplitude: float = 0.0,
                            seed: int = 0, b=1.0) -> SpectralSystem:
    """Dispersive family on n = -n_modes..-1, 1..n_modes with sgn(lambda_n) = sgn(n)."""
    if alpha <= 1:
        raise DomainError(f"two-sided generator needs alpha > 1, got {alpha}")
    if rate <= 0 or n_modes < 1:
        raise DomainError("rate must be positive and n_modes >= 1")
    rng = np.random.default_rng(seed)
    n = np.arange(1, n_modes + 1, dtype=float)
    eps_pos = _perturbations(n_modes, perturb_amplitude, rng)
    eps_neg = _perturbations(n_modes, perturb_amplitude, rng)
    pos = rate * n**alpha + eps_pos * n ** (alpha - 1)
    neg = -(rate * n**alpha + eps_neg * n ** (alpha - 1))
    if np.any(pos <= 0) or np.any(neg >= 0):
        raise GapViolation("perturbation flipped the sign of an eigenvalue")
    lam = np.concatenate([neg[::-1], pos])
    _check_regular(lam)
    idx = np.concatenate([-np.arange(n_modes, 0, -1), np.arange(1, n_modes + 1)])
    return SpectralSystem(Kind.DISPERSIVE, idx, lam, np.full(lam.size, complex(b)), alpha, rate,
                          f"two-sided alpha={alpha:g}")


def periodic_kdv_spectrum(L: float = 2 * math.pi, n_modes: int = 8) -> SpectralSystem:
    """Linear KdV on a circle of length L with control acting through the boundary mode.

    ``lambda_k = (2 pi k / L)^3`` for k = +-1..+-n_modes, and
    ``|b_k| = (1 + 4 pi^2 k^2 / L^2)^(1/2) (2 pi |k| / L) / (sqrt(L) k^2)``.
    """
    if L <= 0 or n_modes < 1:
        raise DomainError("L must be positive and n_modes >= 1")
    w = 2 * math.pi / L
    k = np.concatenate([-np.arange(n_modes, 0, -1), np.arange(1, n_modes + 1)])
    kf = k.astype(float)
    lam = (w * kf) ** 3
    bs = np.sqrt(1 + (w * kf) ** 2) * (w * np.abs(kf)) / (math.sqrt(L) * kf**2)
    return SpectralSystem(Kind.DISPERSIVE, k, lam, bs.astype(complex), 3.0, w**3,
                          f"periodic KdV L={L:g}")


def fractional_spectrum(gamma_exp: float, L: float = math.pi, n_modes: int = 8,
                        kind: Kind | str = Kind.PARABOLIC) -> SpectralSystem:
    """Fractional Laplacian ``(-d^2/dx^2)^gamma`` on (0, L) with boundary control.

    ``lambda_k = (k pi / L)^(2 gamma)``; the control coefficient is the
    boundary derivative of the normalised eigenfunction divided by k^2.
    """
    if gamma_exp < 1:
        raise DomainError(
            f"fractional exponent gamma={gamma_exp:g} is below 1; boundary null "
            "controllability is only available for gamma >= 1"
        )
    if L <= 0 or n_modes < 1:
        raise DomainError("L must be positive and n_modes >= 1")
    k = np.arange(1, n_modes + 1)
    w = math.pi / L
    lam = (w * k) ** (2 * gamma_exp)
    bs = math.sqrt(2) * np.sqrt(1 + (w * k) ** 2) * (w * k) / (math.sqrt(L) * k**2.0)
    return SpectralSystem(Kind(kind), k, lam, bs.astype(complex), 2 * gamma_exp, w ** (2 * gamma_exp),
                          f"fractional gamma={gamma_exp:g}")


def heat_spectrum(n_modes: int = 8, b=1.0) -> SpectralSystem:
    """lambda_n = n^2, b_n = b: the model parabolic system with alpha = 2."""
    return make_power_law_spectrum(2.0, 1.0, n_modes, 0.0, 0, Kind.PARABOLIC, b)


def spectral_gap(sys: SpectralSystem) -> float:
    """Smallest distance between distinct stored eigenvalues."""
    if sys.size < 2:
        return math.inf
    return float(np.min(np.diff(sys.lambdas)))


def validate_asymptotics(sys: SpectralSystem) -> FitReport:
    """Fit ``log|lambda|`` against ``log|n|`` over the upper half of stored indices.

    The residual column measures ``|lambda_n - rate n^alpha| / n^(alpha-1)``
    against the declared ``alpha`` and ``rate`` over all stored modes.
    """
    n = np.abs(sys.indices).astype(float)
    lam = np.abs(sys.lambdas)
    top = n >= np.median(n)
    if np.unique(n[top]).size < 2:
        top = np.ones_like(top)
    x, y = np.log(n[top]), np.log(lam[top])
    if np.unique(x).size >= 2:
        slope, icpt = np.polyfit(x, y, 1)
        pred = slope * x + icpt
        ss_res = float(np.sum((y - pred) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, icpt, r2 = float("nan"), float("nan"), float("nan")
    resid = np.abs(lam - sys.rate * n**sys.alpha) / n ** (sys.alpha - 1)
    return FitReport(
        quantity="log|lambda| vs log|n|",
        slope=float(slope),
        intercept=float(icpt),
        r2=float(r2),
        extra={"exponent": float(slope), "prefactor": float(math.exp(icpt)),
               "max_residual": float(resid.max())},
    )
