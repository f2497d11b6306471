"""Command-line experiment runner.

Subcommands: spectrum, synth, cost-sweep, lemma-verify.  Results are CSV
files with a ``# key=value`` header holding the resolved configuration; the
first header line is a timestamp and is the only part that changes between
identical runs.

Exit codes: 0 success, 2 configuration error, 3 precision error,
4 verification failure, 1 any other computation error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import PRESETS, ExperimentConfig
from .errors import ConfigError, DomainError, FastControlError, PrecisionInsufficient
from .reports import rows_to_csv

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_PRECISION, EXIT_VERIFY = 0, 1, 2, 3, 4


class VerificationFailure(FastControlError):
    pass


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--preset", choices=PRESETS)
    common.add_argument("--alpha", type=float)
    common.add_argument("--rate", type=float)
    common.add_argument("--modes", type=int)
    common.add_argument("--kind", choices=("parabolic", "dispersive"))
    common.add_argument("--L", dest="L", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--perturb", type=float)
    common.add_argument("--T", dest="T", type=float)
    common.add_argument("--t-grid", dest="t_grid", type=_floats)
    common.add_argument("--delta", type=float)
    common.add_argument("--digits", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--y0")
    common.add_argument("--workers", type=int)
    common.add_argument("--with-biorthogonal", dest="with_biorthogonal", action="store_const", const=True)
    common.add_argument("--alpha-grid", dest="alpha_grid", type=_floats)
    common.add_argument("--out", help="output directory")
    parser = argparse.ArgumentParser(prog="fastcontrol", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("spectrum", "write a spectrum JSON and its asymptotic fit"),
                           ("synth", "biorthogonal and minimal-norm controls for one initial state"),
                           ("cost-sweep", "truncated control cost over a grid of horizons"),
                           ("lemma-verify", "integral identities and inequality suite")):
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "command") and v is not None}
    if args.command == "lemma-verify" and "alpha" in overrides and "alpha_grid" not in overrides:
        overrides["alpha_grid"] = (overrides["alpha"],)
    return cfg.updated(overrides).validate()


def _meta(cfg: ExperimentConfig, command: str, extra=None) -> dict:
    meta = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "command": command}
    for k, v in sorted(cfg.resolved().items()):
        meta[k] = ",".join(repr(float(t)) for t in v) if isinstance(v, tuple) else v
    meta.update(extra or {})
    return meta


def _write(cfg, name, text):
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# --- spectrum ---------------------------------------------------------------------

def cmd_spectrum(cfg: ExperimentConfig) -> int:
    from .spectral import spectral_gap, validate_asymptotics

    system = cfg.build_system()
    rep = validate_asymptotics(system)
    p1 = _write(cfg, "spectrum.json", system.to_json())
    rows = [("exponent", rep.exponent), ("prefactor", rep.prefactor), ("r2", rep.r2),
            ("max_residual", rep.max_residual), ("declared_alpha", system.alpha),
            ("declared_rate", system.rate), ("gap", spectral_gap(system))]
    p2 = _write(cfg, "spectrum_fit.csv", rows_to_csv(("quantity", "value"), rows, _meta(cfg, "spectrum")))
    print(f"{system.name}: {system.size} modes, fitted exponent {rep.exponent:.6g} -> {p1}, {p2}")
    return EXIT_OK


# --- synth -----------------------------------------------------------------------

def _initial_state(cfg, system):
    from .signals import ModalState

    spec = cfg.y0.strip().lower()
    if spec == "random":
        return ModalState.random_unit(system, cfg.seed)
    if spec == "zero":
        return ModalState.zeros(system)
    try:
        vals = [complex(v.replace(" ", "")) for v in cfg.y0.split(",")]
    except ValueError as exc:
        raise ConfigError(f"y0 must be 'random', 'zero' or comma-separated numbers, got {cfg.y0!r}") from exc
    if len(vals) != system.size:
        raise ConfigError(f"y0 has {len(vals)} entries but the system has {system.size} modes")
    return ModalState(np.array(vals))


def cmd_synth(cfg: ExperimentConfig) -> int:
    from .gram import gram_matrix, minimal_norm_control
    from .simulation import residual_norm
    from .synthesis import synthesize_control

    system = cfg.build_system()
    y0 = _initial_state(cfg, system)
    gs = gram_matrix(system, cfg.T, cfg.digits)
    ug, gnorm = minimal_norm_control(gs, y0)
    ub = synthesize_control(system, y0, cfg.T, cfg.delta)
    rg = residual_norm(system, y0, ug)
    rb = residual_norm(system, y0, ub, method="samples")
    rows = [("gram", float(gnorm), ug.linf_norm, rg), ("biorthogonal", ub.l2_norm, ub.linf_norm, rb)]
    _write(cfg, "synth.csv", rows_to_csv(("method", "l2_norm", "linf_norm", "residual"), rows,
                                         _meta(cfg, "synth", {"digits_used": gs.precision.digits})))
    for r in rows:
        print(f"{r[0]:>12}: ||u||_2={r[1]:.6g} ||u||_inf={r[2]:.6g} residual={r[3]:.3e}")
    problems = []
    if float(gnorm) > ub.l2_norm * (1 + 1e-10) + 1e-300:
        problems.append("minimal-norm control is larger than the biorthogonal control")
    if rg > 1e-8:
        problems.append(f"minimal-norm residual {rg:.3e} exceeds 1e-8")
    if rb > 1e-4:
        problems.append(f"biorthogonal residual {rb:.3e} exceeds 1e-4")
    if problems:
        raise VerificationFailure("; ".join(problems))
    return EXIT_OK


# --- cost sweep --------------------------------------------------------------------

def _sweep_point(payload):
    from .gram import gram_matrix, lower_bound_cost, truncated_cost
    from .spectral import SpectralSystem
    from .synthesis import biorthogonal_cost_estimate

    sys_json, T, digits, with_bio, delta = payload
    system = SpectralSystem.from_json(sys_json)
    try:
        gs = gram_matrix(system, T, digits)
    except PrecisionInsufficient as exc:
        raise PrecisionInsufficient(f"at T={T:g}: {exc}", exc.condition, exc.digits) from None
    with gs.precision.workdps():
        cost, lower = float(truncated_cost(gs)), float(lower_bound_cost(gs))
        cond = float(np.log10(float(gs.condition)))
    bio = math.nan
    if with_bio:
        try:
            bio = biorthogonal_cost_estimate(system, T, delta)
        except FastControlError:
            bio = math.nan
    return (T, cost, lower, cond, gs.precision.digits, bio)


def sweep_rows(cfg: ExperimentConfig):
    system = cfg.build_system()
    payloads = [(system.to_json(), float(T), cfg.digits, cfg.with_biorthogonal, cfg.delta)
                for T in sorted(set(cfg.t_grid))]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    return system, sorted(rows, key=lambda r: r[0])


def fit_rows(system, rows):
    from .gram import theorem_rate_constant
    from .reports import linear_fit

    a, R = system.alpha, system.rate
    exps = [("1/(alpha-1)", 1 / (a - 1)), ("1/alpha", 1 / a)]
    if a > 1.5:
        exps.append(("1/(alpha-1.5)", 1 / (a - 1.5)))
    out = []
    cols = {"cost": 1, "lower_bound": 2, "biorthogonal": 5}
    for qty, col in cols.items():
        pts = [(r[0], r[col]) for r in rows if np.isfinite(r[col]) and r[col] > 0]
        if len(pts) < 3:
            continue
        for label, e in exps:
            rep = linear_fit([(R * T) ** (-e) for T, _ in pts], [math.log(v) for _, v in pts])
            out.append((qty, label, e, rep.slope, rep.intercept, rep.r2, len(pts)))
    const = theorem_rate_constant(a, system.kind, system.two_sided)
    return out, const


def cmd_cost_sweep(cfg: ExperimentConfig) -> int:
    system, rows = sweep_rows(cfg)
    meta = _meta(cfg, "cost-sweep")
    _write(cfg, "cost_sweep.csv", rows_to_csv(
        ("T", "cost", "lower_bound", "condition_log10", "digits", "biorthogonal"), rows, meta))
    fits, const = fit_rows(system, rows)
    meta["theorem_constant"] = repr(const)
    _write(cfg, "cost_sweep_fit.csv", rows_to_csv(
        ("quantity", "abscissa", "exponent", "slope", "intercept", "r2", "n_points"), fits, meta))
    for f in fits:
        if f[1] == "1/(alpha-1)":
            print(f"{f[0]:>12}: slope={f[3]:.6g} r2={f[5]:.6f} (theorem constant {const:.6g})")
    bad = [r[0] for r in rows if r[2] > r[1]]
    if bad:
        raise VerificationFailure(f"lower bound exceeds the truncated cost at T={bad}")
    return EXIT_OK


# --- lemma verification -----------------------------------------------------------

IDENTITY_TOL = {"I": 1e-10, "W": 1e-8, "H": 1e-10, "V-2F1": 1e-8}


def lemma_rows(cfg: ExperimentConfig):
    from . import lemmas

    alphas = cfg.alpha_grid or lemmas.DEFAULT_ALPHAS
    x = lemmas.default_x_grid(cfg.x_points)
    ux = lemmas.unit_grid(cfg.x_points)
    reports = lemmas.verify_inequality_suite(alphas, x, ux)
    rows, failed, informational = [], [], False
    for rep in reports:
        status = "ok" if rep.max_slack <= cfg.tol else ("witness" if rep.informational else "FAIL")
        informational |= rep.informational and rep.max_slack > cfg.tol
        if status == "FAIL":
            failed.append(rep.name)
        for a, xv, lhs, rhs, slack in rep.witnesses:
            rows.append(("inequality", rep.name, a, xv, lhs, rhs, slack, status))
    for chk in lemmas.identity_checks():
        tol = IDENTITY_TOL[chk.name]
        status = "ok" if chk.rel_error <= tol else "FAIL"
        if status == "FAIL":
            failed.append(f"{chk.name}{chk.args}")
        a = chk.args[0] if chk.name != "H" else math.nan
        xv = chk.args[1] if len(chk.args) > 1 else (chk.args[0] if chk.name == "H" else math.nan)
        rows.append(("identity", chk.name, a, xv, chk.computed, chk.reference, chk.rel_error, status))
    f = lemmas.hyp2f1(-0.5, -0.5, 0.5, -1.0)
    rows.append(("bound", "2F1(-1/2,-1/2;1/2;-1)>=0.52", 2.0, -1.0, 0.52, f, 0.52 - f,
                 "ok" if f >= 0.52 else "FAIL"))
    h = lemmas.harmonic_frac(0.5)
    rows.append(("bound", "H_1/2<=0.62", 2.0, 0.5, h, 0.62, h - 0.62, "ok" if h <= 0.62 else "FAIL"))
    failed += [r[1] for r in rows[-2:] if r[-1] == "FAIL"]
    return rows, failed, informational


def cmd_lemma_verify(cfg: ExperimentConfig) -> int:
    rows, failed, informational = lemma_rows(cfg)
    meta = _meta(cfg, "lemma-verify", {"informational": str(informational).lower()})
    path = _write(cfg, "lemma_verify.csv", rows_to_csv(
        ("group", "name", "alpha", "x", "lhs", "rhs", "slack", "status"), rows, meta))
    if informational:
        print("warning: alpha < 2 requested; violations are listed as witnesses only", file=sys.stderr)
    print(f"{len(rows)} rows -> {path}")
    if failed:
        raise VerificationFailure(f"failed checks: {', '.join(failed)}")
    return EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "synth": cmd_synth, "cost-sweep": cmd_cost_sweep,
            "lemma-verify": cmd_lemma_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionInsufficient as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except FastControlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
