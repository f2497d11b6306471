"""Small report records and CSV helpers shared by the numerical modules."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog


@dataclass
class FitReport:
    """Least-squares line ``y = slope * x + intercept`` with its R^2."""

    quantity: str
    slope: float
    intercept: float
    r2: float
    extra: dict = field(default_factory=dict)

    def __getattr__(self, name):
        extra = self.__dict__.get("extra", {})
        if name in extra:
            return extra[name]
        raise AttributeError(name)


@dataclass
class BoundReport:
    """Outcome of a calibrate-then-validate check of a growth bound.

    ``slack`` is the measured quantity minus the bound's leading term.  The
    envelope ``c0 + d*log(1+|z|)`` is fitted on the calibration half and
    ``max_violation`` is the largest excess over it on the validation half
    (non-positive means the bound held).
    """

    name: str
    c0: float
    d: float
    max_violation: float
    n_calibration: int
    n_validation: int
    rows: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.max_violation <= 0.0

    def to_csv(self) -> str:
        return rows_to_csv(["abs_z", "value", "slack", "envelope"], self.rows)


@dataclass
class InequalityReport:
    name: str
    max_slack: float
    witnesses: list
    n_points: int
    grid: str = ""
    informational: bool = False

    @property
    def holds(self) -> bool:
        return self.max_slack <= 0.0


def linear_fit(x, y, quantity="") -> FitReport:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    slope, icpt = np.polyfit(x, y, 1)
    pred = slope * x + icpt
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitReport(quantity, float(slope), float(icpt), r2)


def split_halves(key):
    """Indices of the lower and upper halves of ``key`` (sorted ascending)."""
    order = np.argsort(np.asarray(key), kind="stable")
    half = (order.size + 1) // 2
    return order[:half], order[half:]


def fit_log_envelope(logs, slack, allow_slope=True):
    """Tightest ``c0 + d*logs`` (d >= 0) lying above every finite ``slack``.

    Minimises the mean envelope height by linear programming.
    """
    logs = np.asarray(logs, float)
    slack = np.asarray(slack, float)
    ok = np.isfinite(slack)
    logs, slack = logs[ok], slack[ok]
    if slack.size == 0:
        return -math.inf, 0.0
    if not allow_slope:
        return float(slack.max()), 0.0
    res = linprog(
        c=[1.0, float(logs.mean())],
        A_ub=np.column_stack([-np.ones_like(logs), -logs]),
        b_ub=-slack,
        bounds=[(None, None), (0.0, None)],
        method="highs",
    )
    if not res.success:
        return float(slack.max()), 0.0
    c0, d = res.x
    # guard against solver round-off
    c0 += max(0.0, float(np.max(slack - c0 - d * logs)))
    return float(c0), float(d)


def calibrate_validate(name, absz, values, slack, allow_slope=True) -> BoundReport:
    """Fit an envelope on the smaller-|z| half and measure excess on the rest."""
    absz = np.asarray(absz, float)
    slack = np.asarray(slack, float)
    values = np.asarray(values, float)
    logs = np.log1p(absz)
    cal, val = split_halves(absz)
    c0, d = fit_log_envelope(logs[cal], slack[cal], allow_slope)
    env = c0 + d * logs
    excess = slack[val] - env[val]
    excess = excess[np.isfinite(excess)]
    viol = float(excess.max()) if excess.size else -math.inf
    rows = [(float(a), float(v), float(s), float(e)) for a, v, s, e in zip(absz, values, slack, env)]
    return BoundReport(name, c0, d, viol, int(cal.size), int(val.size), rows)


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(header, rows, meta=None) -> str:
    """CSV text with optional ``# key=value`` header lines."""
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_value(v) for v in r])
    return buf.getvalue()
