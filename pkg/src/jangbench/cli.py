"""Command-line driver: solve, continue, barrier, fit, schwarzschild, sweep.

Usage: ``jangbench <subcommand> CONFIG``.  Exit codes: 0 success, 1 numeric
failure, 2 configuration error.  Outputs go to ``[output] dir`` relative to
the config file, together with the fully-defaulted config echo.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import BlowupFit, classify_rate, fit_blowup_exponent, profile_decay_exponent
from .barriers import certify_barrier, log_grid, verify_barrier
from .config import AUTO, RunConfig, check_regime_config, load_config, parse_config
from .continuation import continuation_family1, continuation_family2, geometric_schedule, limit_grid
from .errors import ConfigError, JangBenchError, RegimeError, ValidationError
from .geometry import FoliatedData, read_tabulated_csv, synthetic_data
from .grid import extended_grid, geometric_grid
from .operator import OperatorParams, jang_residual
from .schwarzschild import schwarzschild_data, schwarzschild_grid
from .solver import solve_regularized

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2
SUBCOMMANDS = ("solve", "continue", "barrier", "fit", "schwarzschild", "sweep")


class NumericFailure(JangBenchError):
    """A run finished but did not meet its numerical success criterion."""


# ---------------------------------------------------------------------------
# data and grids from config


def build_data(cfg: RunConfig, b: float | None = None, l: float | None = None):
    """Return (data, schwarzschild case or None)."""
    d = cfg["data"]
    if d["kind"] == "synthetic":
        return synthetic_data(d["b"] if b is None else b, d["l"] if l is None else l, d["c0"], r_h=d["r_h"],
                              collar=d["collar"], r_max=d["r_max"], outer_knn=d["outer_knn"]), None
    if d["kind"] == "schwarzschild":
        case = schwarzschild_data(d["m"], d["f_choice"], None if d["r_in"] == AUTO else d["r_in"], d["r_out"])
        return case.data, case
    data = read_tabulated_csv(cfg.path(d["path"]), d["b"], d["l"], d["c_rate"], d["rate_condition"])
    return data, None


def _h_min(cfg, default):
    h = cfg["grid"]["h_min"]
    return default if h == AUTO else h


# ---------------------------------------------------------------------------
# subcommands


def run_solve(cfg: RunConfig) -> dict:
    data, case = build_data(cfg)
    s, c = cfg["solver"], cfg["continuation"]
    n = cfg["grid"]["n"]
    params = OperatorParams(epsilon=s["epsilon"], delta=s["delta"], source_mode=s["source_mode"])
    if s["extend"]:
        data = data.extend_inward(c["sigma0"], c["vartheta"])
        grid = extended_grid(data.tau_in, data.tau_max, n, h_min=_h_min(cfg, 1e-6))
    elif case is not None and cfg["grid"]["h_min"] == AUTO:
        grid = schwarzschild_grid(case, n)
    else:
        grid = geometric_grid(data.tau_in, data.tau_max, n, h_min=_h_min(cfg, 1e-8))
    if s["bc_inner"] != AUTO:
        bc = (s["bc_inner"], s["bc_outer"])
    elif case is not None:
        bc = (float(case.exact.psi(grid.nodes[0])), float(case.exact.psi(grid.nodes[-1])))
    elif s["extend"] and params.source_eps > 0:
        bc = (c["vartheta"] / (2.0 * params.epsilon), s["bc_outer"])
    else:
        bc = (0.0, s["bc_outer"])
    prof, rep = solve_regularized(data, params, bc, grid, init=s["init"], tol=s["tol"], max_iter=s["max_iter"],
                                  backend=None if s["backend"] == "auto" else s["backend"])
    out = cfg.out_dir
    cfg.write_echo(out)
    io.write_profile_csv(out / "profile.csv", prof, data)
    record = {"report": rep.to_dict(), "label": data.label, "bc": list(bc)}
    if case is not None:
        record["exact_max_error"] = float(np.max(np.abs(prof.values - case.exact.psi(grid.nodes))))
    if rep.classification == "bounded":
        record["verdict"] = classify_rate(BlowupFit("bounded"), data.b, data.l)
    io.write_json(out / "report.json", record)
    if not rep.converged:
        raise NumericFailure(f"solve did not converge: {rep.message}")
    return record


def continue_record(data: FoliatedData, family: int, cfg: RunConfig, out: Path | None = None) -> dict:
    c, g = cfg["continuation"], cfg["grid"]
    eps = geometric_schedule(c["eps_start"], c["eps_stop"], c["eps_ratio"])
    if family == 1:
        tau_min = None if g["tau_min"] == AUTO else g["tau_min"]
        res = continuation_family1(data, eps, c["delta_schedule"], limit_grid(data, tau_min, g["n"]),
                                   sigma0=c["sigma0"], vartheta=c["vartheta"], eps_stage=c["eps_stage"])
    else:
        res = continuation_family2(data, c["delta_schedule_family2"], eps, n=g["n"], h_min=_h_min(cfg, 1e-8),
                                   max_iter=c["max_iter"], eps_stage=c["eps_stage"])
    fit = fit_blowup_exponent(res.limit)
    fit.verdict = classify_rate(fit, data.b, data.l)
    rec = {
        "family": family,
        "b": data.b,
        "l": data.l,
        "classification": res.report.classification,
        "fit": {k: v for k, v in fit.to_dict().items() if k != "slope_curve"},
        "verdict": fit.verdict,
        "enclosure": {k: v for k, v in (res.report.enclosure or {}).items() if k != "stages"},
        "converged": res.report.converged,
        "message": res.report.message,
    }
    if family == 1 and data.r_of_tau is not None:
        try:
            rec["outer_decay_slope"] = profile_decay_exponent(res.limit, data)
        except ValidationError as exc:
            rec["outer_decay_slope"] = None
            rec["outer_decay_note"] = str(exc)
    if out is not None:
        io.write_profile_csv(out / f"family{family}_limit.csv", res.limit)
        for k, p in enumerate(res.sequence):
            io.write_profile_csv(out / f"family{family}_seq{k:02d}.csv", p)
        io.write_json(out / f"family{family}_fit.json", fit.to_dict())
        io.write_json(out / f"family{family}_report.json", {**rec, "report": res.report.to_dict()})
    if res.report.classification not in ("blowup_plus", "blowup_minus"):
        rec["failure"] = f"limit not classified as blow-up: {res.report.message}"
    return rec


def run_continue(cfg: RunConfig) -> dict:
    data, case = build_data(cfg)
    fam = cfg["continuation"]["family"]
    check_regime_config(data.b, data.l, fam)
    out = cfg.out_dir
    cfg.write_echo(out)
    rec = continue_record(data, fam, cfg, out)
    if "failure" in rec:
        raise NumericFailure(rec["failure"])
    return rec


def run_barrier(cfg: RunConfig) -> dict:
    data, _ = build_data(cfg)
    bcfg = cfg["barrier"]
    cert = certify_barrier(data, bcfg["role"], family=bcfg["family"], tau0=bcfg["tau0"], n=bcfg["n_points"],
                           decades=bcfg["decades"])
    rep = verify_barrier(cert.barrier, data, tau_grid=log_grid(cert.tau0, bcfg["n_points"], bcfg["decades"]))
    out = cfg.out_dir
    cfg.write_echo(out)
    io.write_margin_csv(out / "margin.csv", rep)
    rec = {"kind": cert.barrier.kind, "role": cert.barrier.role, "params": cert.barrier.params,
           "tau0": cert.tau0, "summary": rep.summary()}
    io.write_json(out / "barrier.json", rec)
    if not rep.ok:
        raise NumericFailure(f"barrier verification failed with {rep.violations} violations")
    return rec


def run_fit(cfg: RunConfig, profile_path: str | None = None) -> dict:
    f = cfg["fit"]
    if not (profile_path or f["profile"]):
        raise ConfigError("[fit] profile is required")
    # a command-line path is relative to the working directory, a config path to the config file
    tau, psi = io.read_profile_csv(Path(profile_path) if profile_path else cfg.path(f["profile"]))
    fit = fit_blowup_exponent((tau, psi), delta=f["delta"], tau0=f["tau0"])
    fit.verdict = classify_rate(fit, cfg["data"]["b"], cfg["data"]["l"])
    out = cfg.out_dir
    cfg.write_echo(out)
    io.write_json(out / "fit.json", fit.to_dict())
    return fit.to_dict()


def run_schwarzschild(cfg: RunConfig) -> dict:
    d = cfg["data"]
    case = schwarzschild_data(d["m"], d["f_choice"], None if d["r_in"] == AUTO else d["r_in"], d["r_out"])
    data = case.data
    grid = schwarzschild_grid(case, cfg["grid"]["n"])
    x = grid.nodes
    p, dp, ddp = case.exact.values(x)
    res = jang_residual(data, x, p, dp, ddp)
    bc = (float(p[0]), float(p[-1]))
    prof, rep = solve_regularized(data, OperatorParams(), bc, grid, init="zero")
    out = cfg.out_dir
    cfg.write_echo(out)
    io.write_table(out / "schwarzschild_data.csv",
                   ["tau", "r", "phi", "H_S", "trS_k", "k_nn", "theta_plus", "theta_minus", "psi_exact"],
                   [x, case.r_of_tau(x), data.phi(x), data.H_S(x), data.trS_k(x), data.k_nn(x),
                    data.theta_plus(x), data.theta_minus(x), p])
    io.write_profile_csv(out / "profile.csv", prof, data)
    rec = {
        "manufactured_max_residual": float(np.max(np.abs(res))),
        "recovery_max_error": float(np.max(np.abs(prof.values - p))),
        "converged": rep.converged,
        "newton_iterations": rep.newton_iterations,
        "detected_b": case.detected_b,
        "detected_l": case.detected_l,
        "classification": rep.classification,
        "verdict": classify_rate(BlowupFit("bounded"), data.b, data.l) if rep.converged else None,
        "label": data.label,
    }
    io.write_json(out / "check.json", rec)
    if not rep.converged or rec["manufactured_max_residual"] > 1e-8:
        raise NumericFailure("manufactured-solution check failed")
    return rec


def _sweep_task(args):
    """One (b, l) sweep run; writes its record to its own temp file and returns the path."""
    cfg_text, base_dir, b, l, run_id, tmp_dir = args
    cfg = parse_config(cfg_text, base_dir)
    data, _ = build_data(cfg, b, l)
    rec = {"run_id": run_id, "b": b, "l": l, "runs": [], "verdicts": []}
    fams = []
    if -(l - 1) / 2 - 1e-12 <= b < (l + 1) / 2 - 1e-12:
        fams.append(1)
    if 0.5 - 1e-12 <= b < (l + 1) / 2 - 1e-12:
        fams.append(2)
    if not fams:
        rec["verdicts"].append("out_of_regime" if abs(b - (l + 1) / 2) > 1e-12 else "sticking")
    for fam in fams:
        try:
            r = continue_record(data, fam, cfg)
        except JangBenchError as exc:
            r = {"family": fam, "error": str(exc), "verdict": "mismatch"}
        rec["runs"].append(r)
        rec["verdicts"].append(r["verdict"])
    path = Path(tmp_dir) / f"{run_id}.jsonl"
    io.write_jsonl(path, [rec])
    return str(path)


def sweep_workers(cfg: RunConfig) -> int:
    env = os.environ.get("JANGBENCH_WORKERS")
    if env is not None:
        try:
            w = int(env)
        except ValueError:
            raise ConfigError(f"JANGBENCH_WORKERS must be a positive integer, got {env!r}") from None
        if w < 1:
            raise ConfigError(f"JANGBENCH_WORKERS must be a positive integer, got {env!r}")
        return w
    return cfg["sweep"]["workers"]


def run_sweep(cfg: RunConfig) -> list:
    sw = cfg["sweep"]
    out = cfg.out_dir
    cfg.write_echo(out)
    text = cfg.echo()
    tasks = []
    for i, l in enumerate(sw["l_values"]):
        for j, b in enumerate(sw["b_values"]):
            tasks.append((b, l, f"{cfg['output']['run_id']}-l{i:02d}-b{j:02d}"))
    workers = sweep_workers(cfg)
    with tempfile.TemporaryDirectory(dir=out) as tmp:
        args = [(text, str(cfg.base_dir), b, l, rid, tmp) for b, l, rid in tasks]
        if workers == 1:
            paths = [_sweep_task(a) for a in args]
        else:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                paths = list(ex.map(_sweep_task, args))
        lines = []
        for p in sorted(paths):
            with open(p, encoding="utf-8") as fh:
                lines.extend(ln for ln in fh.read().splitlines() if ln)
    path = out / "sweep.jsonl"
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(ln + "\n" for ln in lines))
    import json

    return [json.loads(ln) for ln in lines]


# ---------------------------------------------------------------------------


def run(subcommand: str, cfg: RunConfig, **kw):
    fn = {"solve": run_solve, "continue": run_continue, "barrier": run_barrier, "fit": run_fit,
          "schwarzschild": run_schwarzschild, "sweep": run_sweep}[subcommand]
    return fn(cfg, **kw)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="jangbench", description="Radial generalized Jang equation lab")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("config", help="path to the run configuration")
    ap.add_argument("--profile", help="profile CSV for fit (overrides [fit] profile)")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        kw = {"profile_path": args.profile} if args.subcommand == "fit" else {}
        if args.profile and args.subcommand != "fit":
            raise ConfigError("--profile applies to fit only")
        result = run(args.subcommand, cfg, **kw)
    except (ConfigError, RegimeError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (JangBenchError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.subcommand == "sweep":
        for rec in result:
            print(f"{rec['run_id']}: b={rec['b']:g} l={rec['l']:g} verdicts={','.join(rec['verdicts'])}")
    else:
        print(io.dumps(result if isinstance(result, dict) else {"result": result}, indent=None)[:2000])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
