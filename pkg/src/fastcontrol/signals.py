"""Modal states and sampled control signals."""
from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .errors import GridMismatch
from .reports import rows_to_csv
from .spectral import Kind, SpectralSystem


@dataclass
class ModalState:
    """Coefficients ``a_k`` of a state on the stored modes (same order as ``sys.indices``)."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, complex).ravel()

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    @classmethod
    def zeros(cls, sys: SpectralSystem) -> "ModalState":
        return cls(np.zeros(sys.size, complex))

    @classmethod
    def random_unit(cls, sys: SpectralSystem, seed: int = 0, real: bool | None = None) -> "ModalState":
        """Uniform random direction; real for parabolic systems unless told otherwise."""
        rng = np.random.default_rng(seed)
        if real is None:
            real = sys.kind is Kind.PARABOLIC
        v = rng.standard_normal(sys.size).astype(complex)
        if not real:
            v = v + 1j * rng.standard_normal(sys.size)
        return cls(v / np.linalg.norm(v))


@dataclass
class ExponentialSum:
    """Exact form ``u(t) = sum_j c_j exp(rho_j (t - T))`` held in multiprecision."""

    rates: list
    coeffs: list
    T: object
    digits: int

    def __call__(self, t):
        t = np.asarray(t, float)
        with mp.workdps(self.digits):
            out = [complex(mp.fsum(c * mp.exp(r * (mp.mpf(float(s)) - self.T))
                                   for r, c in zip(self.rates, self.coeffs))) for s in t.ravel()]
        return np.array(out).reshape(t.shape)


@dataclass
class ControlSignal:
    """Control sampled on a uniform grid over [0, T]."""

    T: float
    time_grid: np.ndarray
    values: np.ndarray
    exact: ExponentialSum | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.time_grid = np.asarray(self.time_grid, float)
        self.values = np.asarray(self.values, complex)
        if self.time_grid.shape != self.values.shape or self.time_grid.ndim != 1:
            raise GridMismatch("time grid and values must be 1-D arrays of equal length")
        if self.time_grid.size >= 2:
            h = np.diff(self.time_grid)
            if abs(self.time_grid[0]) > 1e-12 * max(1, self.T) or abs(self.time_grid[-1] - self.T) > 1e-9 * max(1, self.T):
                raise GridMismatch("control grid must span [0, T]")
            if np.max(np.abs(h - h.mean())) > 1e-9 * h.mean():
                raise GridMismatch("control grid must be uniform")

    @property
    def step(self) -> float:
        return float(self.time_grid[1] - self.time_grid[0])

    @property
    def l2_norm(self) -> float:
        return float(np.sqrt(np.trapezoid(np.abs(self.values) ** 2, self.time_grid)))

    @property
    def linf_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= 1e-12 * max(1.0, self.linf_norm)))

    def to_csv(self) -> str:
        """Rows (t, re, im) for plotting."""
        return rows_to_csv(("t", "re", "im"), zip(self.time_grid, self.values.real, self.values.imag),
                           {"label": self.label, "T": repr(float(self.T))})

    @classmethod
    def zero(cls, T: float, n_time: int = 201) -> "ControlSignal":
        t = np.linspace(0.0, T, n_time)
        return cls(T, t, np.zeros_like(t, dtype=complex), label="zero")
