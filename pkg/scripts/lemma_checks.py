"""Integral identities and the inequality suite, printed as a table."""
import argparse

from fastcontrol.lemmas import DEFAULT_ALPHAS, INEQUALITIES, identity_checks, verify_inequality_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=list(DEFAULT_ALPHAS))
    args = ap.parse_args()
    print("identities")
    for row in identity_checks():
        print(f"  {row.name:6} {str(row.args):14} computed {row.computed:.15g}  rel err {row.rel_error:.2e}")
    print("inequalities (slack = lhs - rhs, negative means it holds)")
    for rep in verify_inequality_suite(args.alphas):
        tag = " (informational)" if rep.informational else ""
        print(f"  ({rep.name}) {INEQUALITIES[rep.name]}{tag}")
        print(f"      max slack {rep.max_slack:.3e} over {rep.n_points} points")
        for a, x, lhs, rhs, slack in rep.witnesses[:2]:
            print(f"      worst: alpha={a:g} x={x:.4g} lhs={lhs:.10g} rhs={rhs:.10g}")


if __name__ == "__main__":
    main()
