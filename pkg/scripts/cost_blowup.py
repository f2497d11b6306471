"""Small-time growth of the truncated control cost for heat and periodic KdV.

Prints R^2 of ln(cost) against several abscissas so the candidate blow-up
exponents can be compared side by side.
"""
import argparse
import math

from fastcontrol.gram import cost_sweep
from fastcontrol.reports import linear_fit
from fastcontrol.spectral import heat_spectrum, periodic_kdv_spectrum


def table(name, sys, T_grid, digits):
    pts = cost_sweep(sys, T_grid, digits)
    a = sys.alpha
    abscissas = {
        f"T^-{1 / (a - 1):.3g}": [p.T ** (-1 / (a - 1)) for p in pts],
        f"T^-{1 / a:.3g}": [p.T ** (-1 / a) for p in pts],
        f"T^-{1 / (a - 1.5):.3g}": [p.T ** (-1 / (a - 1.5)) for p in pts],
        "ln(1/T)": [math.log(1 / p.T) for p in pts],
    }
    print(f"\n{name} ({sys.size} modes, {digits or 'default'} digits)")
    print(f"{'T':>6} {'cost':>12} {'lower':>12} {'log10 cond':>11}")
    for p in pts:
        print(f"{p.T:6.3f} {p.cost:12.5g} {p.lower:12.5g} {p.condition_log10:11.1f}")
    for label, x in abscissas.items():
        fit = linear_fit(x, [p.log_cost for p in pts])
        print(f"  ln cost vs {label:>9}: slope {fit.slope:9.4g}  R^2 {fit.r2:.5f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, nargs="+", default=[6, 10])
    ap.add_argument("--t-grid", type=float, nargs="+", default=[0.5, 0.35, 0.25, 0.18, 0.12, 0.08])
    args = ap.parse_args()
    for n in args.modes:
        table("heat", heat_spectrum(n), args.t_grid, 40 + 12 * n)
        table("periodic KdV", periodic_kdv_spectrum(2 * math.pi, n), args.t_grid, None)


if __name__ == "__main__":
    main()
