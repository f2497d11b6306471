"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are repeated in the terminal summary) or directly
with ``python tests/test_acceptance.py``.
"""
import math
import os
import tempfile
import time

import mpmath as mp
import numpy as np
import pytest

from fastcontrol.cli import main as cli_main
from fastcontrol.gram import (blowup_fit, cost_sweep, distance_dm, distance_dm_projection, dm_scaling_check,
                              gram_matrix, lower_bound_cost, minimal_norm_control, truncated_cost,
                              worst_case_state)
from fastcontrol.lemmas import (i_closed_form, integral_I, integral_W, verify_inequality_suite,
                                w_closed_form)
from fastcontrol.multiplier import h_beta, link_beta_to_nu, multiplier_properties
from fastcontrol.signals import ModalState
from fastcontrol.simulation import residual_norm
from fastcontrol.spectral import heat_spectrum, periodic_kdv_spectrum
from fastcontrol.synthesis import biorthogonality_matrix, synthesize_control, synthesize_family

RESULTS = []
T_GRID = (0.5, 0.35, 0.25, 0.18, 0.12, 0.08)


def record(label, ok, detail, elapsed, budget=None):
    if budget is not None and elapsed > budget:
        ok = False
        detail += f"; runtime {elapsed:.1f}s exceeds {budget}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail} [{elapsed:.2f}s]"
    RESULTS.append(line)
    print(line)
    return ok


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def crit_1():
    def run():
        return max(abs(integral_I(a) - i_closed_form(a)) / i_closed_form(a) for a in (2, 2.5, 3, 4, 8))
    err, dt = timed(run)
    return record("1 (I identity)", err <= 1e-10, f"max rel err {err:.2e} <= 1e-10", dt, 1.0)


def crit_2():
    pts = [(a, x) for a in (2.0, 3.0) for x in (0.5, 1.0, 10.0)]
    err, dt = timed(lambda: max(abs(integral_W(a, x) - w_closed_form(a, x)) / w_closed_form(a, x) for a, x in pts))
    return record("2 (W closed form)", err <= 1e-8, f"max rel err {err:.2e} <= 1e-8", dt, 1.0)


def crit_3():
    reps, dt = timed(lambda: verify_inequality_suite((2.0, 2.25, 2.5, 3.0, 4.0, 8.0)))
    worst = max(r.max_slack for r in reps)
    return record("3 (inequality suite)", worst <= 1e-9, f"max slack {worst:.2e} <= 1e-9 over (a)-(e)", dt, 60)


def crit_4():
    def run():
        sys = periodic_kdv_spectrum(2 * math.pi, 8)
        M = biorthogonality_matrix(synthesize_family(sys, 1.0, 0.05))
        return float(np.abs(M - np.eye(M.shape[0])).max())
    err, dt = timed(run)
    return record("4 (biorthogonality KdV N=8 T=1)", err <= 1e-6, f"||M-I||_max {err:.2e} <= 1e-6", dt, 300)


def crit_5():
    def run():
        out = {}
        for name, sys, T, digits in (("parabolic", heat_spectrum(8), 0.5, 60),
                                     ("dispersive", periodic_kdv_spectrum(2 * math.pi, 8), 0.5, None)):
            gs = gram_matrix(sys, T, digits)
            fam = synthesize_family(sys, T, 0.05)
            g, b = [], []
            for seed in range(5):
                y0 = ModalState.random_unit(sys, seed)
                g.append(residual_norm(sys, y0, minimal_norm_control(gs, y0)[0]))
                b.append(residual_norm(sys, y0, synthesize_control(sys, y0, T, family=fam), method="samples"))
            out[name] = (max(g), max(b))
        return out
    res, dt = timed(run)
    ok = all(g <= 1e-8 and b <= 1e-4 for g, b in res.values())
    detail = "; ".join(f"{k}: gram {g:.1e} <= 1e-8, biorthogonal {b:.1e} <= 1e-4" for k, (g, b) in res.items())
    return record("5 (closed loop N=8, 5 seeds)", ok, detail, dt)


def crit_6():
    def run():
        rows = []
        for name, sys, T in (("kdv", periodic_kdv_spectrum(2 * math.pi, 8), 1.0),
                             ("kdv", periodic_kdv_spectrum(2 * math.pi, 6), 0.5),
                             ("heat", heat_spectrum(6), 0.5), ("heat", heat_spectrum(8), 1.0)):
            gs = gram_matrix(sys, T)
            lo, c = lower_bound_cost(gs), truncated_cost(gs)
            y0 = worst_case_state(gs)
            _, gnorm = minimal_norm_control(gs, y0)
            bio = synthesize_control(sys, y0, T).l2_norm
            rows.append((f"{name} modes={sys.size} T={T}", float(lo), float(c), float(gnorm), bio, lo <= c))
        return rows
    rows, dt = timed(run)
    ok = all(r[5] and r[3] <= r[4] * (1 + 1e-10) and abs(r[3] - r[2]) <= 1e-10 * r[2] for r in rows)
    detail = "; ".join(f"{r[0]}: {r[1]:.4g} <= {r[2]:.4g} <= {r[4]:.4g}" for r in rows)
    return record("6 (sandwich)", ok, detail, dt)


def _blowup(label, sys):
    def run():
        pts = cost_sweep(sys, T_GRID, 64)
        a = sys.alpha
        fits = {}
        for which in ("cost", "lower"):
            fits[which] = [blowup_fit(pts, a, sys.rate, which, e) for e in (1 / (a - 1), 1 / a, 1 / (a - 1.5))]
        return fits
    fits, dt = timed(run)
    ok, parts = True, []
    for which, (main, alt1, alt2) in fits.items():
        good = main.r2 >= 0.99 and main.slope > 0 and alt1.r2 < main.r2 and alt2.r2 < main.r2
        ok &= good
        parts.append(f"{which}: R2={main.r2:.4f} slope={main.slope:.3g} vs R2 {alt1.r2:.4f}/{alt2.r2:.4f}")
    return record(label, ok, "; ".join(parts), dt, 600)


def crit_7_alpha2():
    return _blowup("7 (blow-up exponent, alpha=2 heat N=6)", heat_spectrum(6))


def crit_7_alpha3():
    return _blowup("7 (blow-up exponent, alpha=3 KdV N=6)", periodic_kdv_spectrum(2 * math.pi, 6))


def crit_8():
    def run():
        worst = 0.0
        for sys in (heat_spectrum(6), periodic_kdv_spectrum(2 * math.pi, 3)):
            gs = gram_matrix(sys, 0.5, 60)
            with gs.precision.workdps():
                for m in sys.indices:
                    a, b = distance_dm(gs, int(m)), distance_dm_projection(gs, int(m))
                    worst = max(worst, float(abs(a - b) / b))
        return worst
    err, dt = timed(run)
    return record("8 (d_m dual computation)", err <= 1e-8, f"max rel diff {err:.2e} <= 1e-8", dt)


def crit_9():
    rep, dt = timed(lambda: dm_scaling_check(heat_spectrum(8), T_GRID, m=1))
    return record("9 (d_m envelope)", rep.holds,
                  f"C={rep.C:.4g} a={rep.a:.4g} max d_1/envelope {rep.max_ratio:.3g} <= 1", dt)


def crit_10():
    def run():
        cfg = link_beta_to_nu(2.0, 0.05, 1.0)
        rng = np.random.default_rng(0)
        grid = rng.uniform(-40, 40, 100) + 1j * rng.uniform(-10, 10, 100)
        props = multiplier_properties(cfg, grid)
        ratio = float(np.max(np.abs(h_beta(cfg, grid)) / np.exp(cfg.beta * np.abs(grid.imag))))
        brackets = []
        for nu in (1, 4, 16, 64):
            p = multiplier_properties(link_beta_to_nu(2.0, 0.05, ((math.pi + 0.05) / 1.0) ** 2 / nu), [0j])
            brackets.append(p.c_lower <= p.c_nu <= p.c_upper)
        return props, ratio, brackets
    (props, ratio, brackets), dt = timed(run)
    ok = abs(props.h_at_zero - 1) <= 1e-12 and ratio <= 1 + 1e-9 and all(brackets)
    return record("10 (multiplier)", ok, f"|H(0)-1|={abs(props.h_at_zero - 1):.1e}; max |H|/e^(b|Im z|)="
                  f"{ratio:.6f}; C_nu brackets {brackets}", dt)


def crit_11():
    def run():
        bodies = []
        with tempfile.TemporaryDirectory() as tmp:
            for i in range(2):
                out = os.path.join(tmp, str(i))
                code = cli_main(["cost-sweep", "--modes", "6", "--seed", "7", "--out", out])
                with open(os.path.join(out, "cost_sweep.csv"), encoding="utf-8") as fh:
                    lines = fh.read().splitlines()
                bodies.append((code, [l for l in lines[1:] if not l.startswith("# out=")]))
        return bodies
    bodies, dt = timed(run)
    ok = bodies[0][0] == bodies[1][0] == 0 and bodies[0][1] == bodies[1][1]
    return record("11 (determinism)", ok, "identical cost-sweep CSV bodies" if ok else "bodies differ", dt)


CRITERIA = [crit_1, crit_2, crit_3, crit_4, crit_5, crit_6, crit_7_alpha2, crit_7_alpha3, crit_8, crit_9,
            crit_10, crit_11]


@pytest.mark.parametrize("crit", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_criterion(crit):
    assert crit()


if __name__ == "__main__":
    for c in CRITERIA:
        c()
