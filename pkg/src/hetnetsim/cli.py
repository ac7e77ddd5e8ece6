"""Experiment runner: analytic tables, simulations, sweeps, planning.

Subcommands
    analytic   closed-form coverage/rate report for one parameter set
    simulate   Monte Carlo estimates (CSV) with a JSON manifest
    compare    association-scheme comparison at the benchmark settings
    sweep      vary one parameter, tabulating analytic vs simulated values
    plan       solve a planning request (JSON in, JSON + contour CSV out)
    validate   quick self-check of closed forms against simulation

Exit codes: 0 success, 2 configuration error, 3 infeasible plan,
4 simulation/validation failure.
"""

import argparse
import csv
import dataclasses
import json
import os
import sys

from . import __version__, analytic, planner, simulator
from ._kernels import backend_name
from .params import (ParameterError, SystemParams, from_config, linear_to_db,
                     load_config, watts_to_dbm)

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_SIMULATION = 4

# CLI overrides use the same dB/dBm convention as the config file
_OVERRIDE_FIELDS = ("lambda_M", "lambda_mu", "lambda_u", "P_M_dbm",
                    "P_mu_dbm", "gamma", "W_hz", "K", "T_db", "R_T", "sigma2")


def _add_param_args(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH",
                   default=os.environ.get("HETNETSIM_CONFIG"),
                   help="JSON config file (env: HETNETSIM_CONFIG)")
    for name in _OVERRIDE_FIELDS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float,
                       default=None, help=f"override config field {name}")


def _add_sim_args(p: argparse.ArgumentParser):
    p.add_argument("-N", "--runs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-L", "--region-km", type=float,
                   default=simulator.DEFAULT_REGION_KM)
    p.add_argument("--scheme", choices=simulator.SCHEMES,
                   default="prioritized-sir")
    p.add_argument("--rate-mode", choices=("average", "realized", "none"),
                   default="average")
    p.add_argument("--jobs", type=int, default=1)


def build_params(args) -> SystemParams:
    config = {}
    if args.config:
        with open(args.config) as f:
            config = json.load(f)
    for name in _OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            config[name] = value
    if "K" in config:
        config["K"] = int(config["K"])
    return from_config(config)


def _config_view(params: SystemParams) -> dict:
    """Parameters in the external dB/dBm convention, for manifests."""
    return {
        "lambda_M": params.lambda_M, "lambda_mu": params.lambda_mu,
        "lambda_u": params.lambda_u,
        "P_M_dbm": round(watts_to_dbm(params.P_M), 10),
        "P_mu_dbm": round(watts_to_dbm(params.P_mu), 10),
        "gamma": params.gamma, "W_hz": params.W_hz, "K": params.K,
        "T_db": round(linear_to_db(params.T), 10), "R_T": params.R_T,
        "sigma2": params.sigma2,
    }


def _write_manifest(path, params, **extra):
    manifest = {"hetnetsim_version": __version__,
                "kernel_backend": backend_name(),
                "params": _config_view(params)}
    manifest.update(extra)
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def _open_out(path):
    return open(path, "w", newline="") if path and path != "-" else sys.stdout


def cmd_analytic(args) -> int:
    params = build_params(args)
    cov = analytic.coverage_report(params)
    rep = analytic.rate_report(params, with_mean_rate=not args.no_mean_rate)
    out = {"coverage": dataclasses.asdict(cov), "rate": dataclasses.asdict(rep)}
    text = json.dumps(out, indent=2)
    if args.out and args.out != "-":
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_simulate(args) -> int:
    params = build_params(args)
    estimates, rows = simulator.monte_carlo(
        params, L=args.region_km, N=args.runs, seed=args.seed,
        scheme=args.scheme, rate_mode=args.rate_mode, n_jobs=args.jobs,
        return_rows=True)
    f = _open_out(args.out)
    w = csv.writer(f)
    w.writerow(["metric", "mean", "stderr", "N", "seed"])
    for est in estimates.values():
        w.writerow([est.metric, repr(est.mean), repr(est.stderr),
                    est.n, est.seed])
    if f is not sys.stdout:
        f.close()
    if args.trace:
        with open(args.trace, "w") as tf:
            for i, row in enumerate(rows):
                tf.write(json.dumps(
                    {"run": i, "outage": int(row[0]),
                     "micro": None if row[0] else int(row[1]),
                     "rate_ok": None if row[2] != row[2] else int(row[2]),
                     "rate": None if row[3] != row[3] else row[3]}) + "\n")
    if args.manifest:
        _write_manifest(args.manifest, params, mode="simulate",
                        N=args.runs, seed=args.seed, L_km=args.region_km,
                        scheme=args.scheme, rate_mode=args.rate_mode)
    return 0


#: Scheme/reuse pairs reported by `compare`, mirroring the published
#: baseline comparison set.
COMPARE_ROWS = (
    ("prioritized-sir", 3),
    ("max-sir", 1),
    ("max-sir", 3),
    ("max-rsrp-shared", 1),
    ("max-rsrp-K", 3),
    ("max-rsrp-rp1", 1),
    ("biased-rsrp-rp2", 1),
)


def cmd_compare(args) -> int:
    # benchmark settings: denser macro tier, lower micro power
    params = build_params(args).with_(
        lambda_M=1.0, lambda_mu=5.0,
        P_mu=SystemParams().P_mu * 10 ** ((26.0 - 30.0) / 10.0))
    f = _open_out(args.out)
    w = csv.writer(f)
    w.writerow(["scheme", "K", "outage", "outage_stderr",
                "A_mu", "A_mu_stderr", "N", "seed"])
    for scheme, K in COMPARE_ROWS:
        est = simulator.monte_carlo(
            params.with_(K=K), L=args.region_km, N=args.runs,
            seed=args.seed, scheme=scheme, rate_mode="none",
            n_jobs=args.jobs)
        w.writerow([scheme, K, repr(est["outage"].mean),
                    repr(est["outage"].stderr), repr(est["A_mu"].mean),
                    repr(est["A_mu"].stderr), args.runs, args.seed])
    if f is not sys.stdout:
        f.close()
    if args.manifest:
        _write_manifest(args.manifest, params, mode="compare",
                        N=args.runs, seed=args.seed, L_km=args.region_km)
    return 0


_SWEEP_METRICS = ("outage", "A_mu", "rate_coverage", "mean_rate")


def _analytic_metrics(params: SystemParams) -> dict:
    cov = analytic.coverage_report(params)
    rep = analytic.rate_report(params)
    return {"outage": cov.O, "A_mu": cov.A_mu,
            "rate_coverage": rep.rc_total, "mean_rate": rep.mean_rate}


def cmd_sweep(args) -> int:
    base = build_params(args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ParameterError("empty sweep value list")
    results = []
    for v in values:
        row = {"value": v, "error": ""}
        try:
            point = from_config({**_config_view(base), args.var: v})
            row["analytic"] = _analytic_metrics(point)
            if not args.no_sim:
                row["sim"] = simulator.monte_carlo(
                    point, L=args.region_km, N=args.runs, seed=args.seed,
                    scheme=args.scheme, rate_mode=args.rate_mode,
                    n_jobs=args.jobs)
        except Exception as exc:  # annotate the row, keep sweeping
            row["error"] = f"{type(exc).__name__}: {exc}"
        results.append(row)

    os.makedirs(args.out_dir, exist_ok=True)
    for metric in _SWEEP_METRICS:
        path = os.path.join(args.out_dir, f"sweep_{metric}.csv")
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow([args.var, "analytic", "sim_mean", "sim_stderr",
                        "error"])
            for row in results:
                if row["error"]:
                    w.writerow([row["value"], "", "", "", row["error"]])
                    continue
                est = row.get("sim", {}).get(metric)
                w.writerow([row["value"], repr(row["analytic"][metric]),
                            repr(est.mean) if est else "",
                            repr(est.stderr) if est else "", ""])
    _write_manifest(os.path.join(args.out_dir, "manifest.json"), base,
                    mode="sweep", var=args.var, values=values,
                    N=args.runs, seed=args.seed, L_km=args.region_km,
                    scheme=args.scheme, rate_mode=args.rate_mode,
                    simulated=not args.no_sim)
    return 0


def cmd_plan(args) -> int:
    if args.request:
        with open(args.request) as f:
            request = planner.request_from_config(json.load(f))
    else:
        request = planner.PlanningRequest()
    solution = planner.solve(request)
    out = {"K": solution.K, "density_ratio": solution.density_ratio,
           "outage": solution.outage,
           "rate_coverage": solution.rate_coverage,
           "path": solution.path,
           "diagnostics": [list(d) for d in solution.diagnostics]}
    text = json.dumps(out, indent=2)
    if args.out and args.out != "-":
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    if args.contour:
        with open(args.contour, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["K", "density_ratio", "rate_coverage"])
            for k, r, rc in planner.contour_grid(request):
                w.writerow([k, repr(r), repr(rc)])
    return 0 if solution.feasible else EXIT_INFEASIBLE


def cmd_validate(args) -> int:
    """Fast cross-check of closed forms against a short simulation."""
    import math
    params = build_params(args)
    checks = []

    O1 = analytic.outage(params.with_(K=1))
    checks.append(("per-band outage K=1",
                   math.isclose(O1, (1 - analytic.band_coverage(
                       params.gamma, params.T)), rel_tol=1e-12)))
    rep = analytic.rate_coverage(params)
    checks.append(("rate-coverage expansions agree",
                   math.isclose(rep.rc_total,
                                analytic.rate_coverage_expanded(params),
                                rel_tol=1e-9)))
    checks.append(("incomplete beta ln(2) case",
                   math.isclose(analytic.incomplete_beta_integral(0.5, 1.0),
                                math.log(2.0), rel_tol=1e-8)))
    est = simulator.monte_carlo(params, L=args.region_km, N=args.runs,
                                seed=args.seed, rate_mode="none",
                                n_jobs=args.jobs)
    dev = abs(est["outage"].mean - analytic.outage(params))
    tol = 4.0 * est["outage"].stderr + 0.01
    checks.append((f"simulated outage within {tol:.4f} of closed form",
                   dev < tol))

    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok &= passed
    return 0 if ok else EXIT_SIMULATION


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hetnetsim",
        description="Two-tier HetNet coverage/rate analysis and simulation")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form report")
    _add_param_args(p)
    p.add_argument("--out", default="-")
    p.add_argument("--no-mean-rate", action="store_true")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    _add_param_args(p)
    _add_sim_args(p)
    p.add_argument("--out", default="-")
    p.add_argument("--trace", metavar="PATH", help="per-run JSONL trace")
    p.add_argument("--manifest", metavar="PATH")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="association scheme comparison")
    _add_param_args(p)
    _add_sim_args(p)
    p.add_argument("--out", default="-")
    p.add_argument("--manifest", metavar="PATH")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="parameter sweep tables")
    _add_param_args(p)
    _add_sim_args(p)
    p.add_argument("--var", required=True,
                   help="config field to sweep (e.g. K, T_db, R_T)")
    p.add_argument("--values", required=True,
                   help="comma-separated values")
    p.add_argument("--no-sim", action="store_true",
                   help="analytic columns only")
    p.add_argument("--out-dir", default="sweep_out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plan", help="cell-planning optimization")
    p.add_argument("--request", metavar="PATH",
                   help="PlanningRequest JSON document")
    p.add_argument("--out", default="-")
    p.add_argument("--contour", metavar="PATH",
                   help="write the (K, ratio, rate coverage) grid CSV")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="quick self-check")
    _add_param_args(p)
    _add_sim_args(p)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except planner.InfeasiblePlan as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except analytic.QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
