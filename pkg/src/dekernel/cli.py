"""Command-line interface: fit, bandwidth, params, simulate, compare,
check-asymptotics.

Exit codes: 0 success, 1 fatal error, 2 partial per-point failure
(curve still written). All outputs embed the tool version and the
resolved configuration, and repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bandwidth import (
    DesignDensity,
    NoiseSpec,
    bandwidth_step_audit,
    loocv_bandwidth,
    loocv_scores,
    optimal_bandwidth_direct,
    optimal_bandwidth_step,
)
from .dataset import Dataset
from .defit import FitRequest, de_fit_curve
from .errors import DekernelError, ParseError
from .growth import QuasiExpModel
from .inference import infer_parameters, nls_solution_fit
from .io import fmt, load_json, read_xy_csv, write_json, write_table_csv
from .kernels import KernelSpec
from .localpoly import local_poly_curve, local_poly_fit_at
from .simlab import (
    ScenarioConfig,
    apply_sparse_design,
    generate_dataset,
    load_scenario,
    mc_bias_variance,
    run_comparison,
    scenario_from_dict,
)

_POLY_TOKENS = {"nw": 0, "ll": 1, "lq": 2}


def _default_threads() -> int:
    env = os.environ.get("DEKERNEL_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _parse_grid(spec: str, x: np.ndarray) -> np.ndarray:
    lo, hi = float(np.min(x)), float(np.max(x))
    if spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ParseError(f"--grid expects start:stop:count, got {spec!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    else:
        count = 200
    if count < 1 or hi < lo:
        raise ParseError(f"--grid range invalid: {spec!r}")
    return np.linspace(lo, hi, count)


def _parse_float_list(spec: str, flag: str) -> list[float]:
    try:
        vals = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"{flag} expects comma-separated numbers, got {spec!r}")
    if not vals:
        raise ParseError(f"{flag} is empty")
    return vals


def _method_parts(token: str):
    """Returns ("poly", degree) or ("de", degree)."""
    t = token.lower()
    if t in _POLY_TOKENS:
        return "poly", _POLY_TOKENS[t]
    if t == "poly":
        return "poly", None  # degree comes from --degree
    if t == "de1":
        return "de", 1
    if t == "de2":
        return "de", 2
    if t.startswith("de:"):
        return "de", int(t.split(":", 1)[1])
    raise ParseError(f"unknown method {token!r}")


def cmd_fit(args) -> int:
    x, y = read_xy_csv(args.input)
    data = Dataset(x, y, "linear")
    kernel = KernelSpec.from_name(args.kernel)
    kind, degree = _method_parts(args.method)
    if kind == "poly" and degree is None:
        if args.degree is None:
            raise ParseError("--method poly requires --degree")
        degree = args.degree
    scale = args.scale
    if args.method.lower() in ("de1", "de2"):
        scale = "log"

    params_info = None
    if kind == "de":
        if args.estimate_params:
            est = infer_parameters(data)
            alpha, lam = est.alpha_hat, est.lambda_hat
            params_info = {
                "alpha_hat": est.alpha_hat,
                "lambda_hat": est.lambda_hat,
                "slope": est.slope,
                "residual_sse": est.residual_sse,
            }
        elif args.alpha is not None and getattr(args, "lambda_") is not None:
            alpha, lam = args.alpha, args.lambda_
        else:
            raise ParseError("de methods need --alpha and --lambda, or --estimate-params")
        model = QuasiExpModel(alpha, lam, 1.0)

    work = data.on_scale(scale) if scale != data.scale else data

    if args.loocv:
        span = float(np.max(x) - np.min(x))
        grid = (_parse_float_list(args.loocv_grid, "--loocv-grid")
                if args.loocv_grid else [f * span for f in (0.12, 0.18, 0.27, 0.4, 0.6, 0.85, 1.0)])
        if kind == "poly":
            def fit_fn(train, x0, h):
                est, _, _ = local_poly_fit_at(train, x0, degree, kernel, h)
                return est
        else:
            def fit_fn(train, x0, h):
                from .defit import de_fit_at

                return de_fit_at(train, x0, FitRequest(model, degree, kernel, h, scale)).estimate
        h = loocv_bandwidth(work, fit_fn, grid)
    elif args.bandwidth is not None:
        h = args.bandwidth
    else:
        raise ParseError("need --bandwidth H or --loocv")

    grid_pts = _parse_grid(args.grid, x)
    if kind == "poly":
        curve = local_poly_curve(work, grid_pts, degree, kernel, h)
    else:
        curve = de_fit_curve(work, grid_pts, FitRequest(model, degree, kernel, h, scale))

    config = {
        "command": "fit",
        "input": str(args.input),
        "method": args.method.lower(),
        "degree": degree,
        "kernel": kernel.name,
        "bandwidth": h,
        "scale": scale,
        "seed": None,
    }
    rows = [
        [g, v, c, it, st]
        for g, v, c, it, st in zip(curve.grid, curve.values, curve.converged,
                                   curve.iterations, curve.status)
    ]
    write_table_csv(args.out, __version__, config,
                    ["x", "value", "converged", "iterations", "status"], rows)
    if params_info is not None:
        write_json(str(args.out) + ".params.json",
                   {"version": __version__, "config": config, "params": params_info})
    if curve.n_failed:
        print(f"{curve.n_failed} of {len(grid_pts)} grid points failed; "
              f"curve written to {args.out}", file=sys.stderr)
        return 2
    return 0


def _density_from_interval(interval) -> DesignDensity:
    return DesignDensity.uniform(interval[0], interval[1])


def cmd_bandwidth(args) -> int:
    kernel = KernelSpec.from_name(args.kernel)
    report: dict = {"version": __version__, "command": "bandwidth", "kernel": kernel.name}
    if args.loocv:
        x, y = read_xy_csv(args.input)
        data = Dataset(x, y, "linear")
        if args.scale == "log":
            data = data.on_scale("log")
        kind, degree = _method_parts(args.method)
        if kind != "poly":
            model = QuasiExpModel(args.alpha, args.lambda_, 1.0)

            def fit_fn(train, x0, h):
                from .defit import de_fit_at

                return de_fit_at(train, x0,
                                 FitRequest(model, degree, kernel, h, args.scale)).estimate
        else:
            def fit_fn(train, x0, h):
                est, _, _ = local_poly_fit_at(train, x0, degree, kernel, h)
                return est
        grid = _parse_float_list(args.h_grid, "--h-grid")
        scores = loocv_scores(data, fit_fn, grid)
        report.update({
            "mode": "loocv",
            "method": args.method,
            "input": str(args.input),
            "h_grid": grid,
            "scores": [{"h": h, "loocv": s} for h, s in scores],
            "selected_h": loocv_bandwidth(data, fit_fn, grid),
        })
    else:
        model = QuasiExpModel(args.alpha, args.lambda_, args.g0)
        density = _density_from_interval(args.interval)
        noise = NoiseSpec(args.sigma)
        inputs = {
            "alpha": args.alpha, "lambda": args.lambda_, "g0": args.g0,
            "x": args.x, "degree": args.degree, "n": args.n, "sigma": args.sigma,
            "interval": list(args.interval),
        }
        if args.step:
            audit = bandwidth_step_audit(model, args.x, args.degree, args.n,
                                         noise, kernel, density)
            report.update({"mode": "step", "inputs": inputs, "audit": audit.as_dict()})
            report["h_step"] = audit.h_step
        else:
            h = optimal_bandwidth_direct(model, args.x, args.degree, args.n,
                                         noise, kernel, density)
            report.update({"mode": "direct", "inputs": inputs, "h_opt": h})
    if args.out:
        write_json(args.out, report)
    else:
        print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def cmd_params(args) -> int:
    x, y = read_xy_csv(args.input)
    data = Dataset(x, y, "linear")
    est = infer_parameters(data)
    payload = {
        "alpha_hat": est.alpha_hat,
        "lambda_hat": est.lambda_hat,
        "slope": est.slope,
        "residual_sse": est.residual_sse,
    }
    if est.alpha_hat <= 0.0 or est.alpha_hat > 1.0:
        payload["warning"] = "alpha_hat outside (0, 1]: growth model may be inappropriate"
    if args.refine:
        refined, _, converged = nls_solution_fit(data, est, refine_alpha=args.refine_alpha)
        payload["refined"] = {
            "alpha_hat": refined.alpha_hat,
            "lambda_hat": refined.lambda_hat,
            "residual_sse_log": refined.residual_sse,
            "converged": converged,
        }
    if args.out:
        write_json(args.out, {"version": __version__, "params": payload})
    else:
        print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def cmd_simulate(args) -> int:
    config, payload = load_scenario(args.scenario)
    data = generate_dataset(config, args.replicate)
    rows = list(zip(data.x, data.y))
    write_table_csv(
        args.out, __version__,
        {"command": "simulate", "scenario": str(args.scenario),
         "replicate": args.replicate, "scale": data.scale,
         "master_seed": config.master_seed},
        ["x", "y"], rows,
    )
    return 0


def cmd_compare(args) -> int:
    config, payload = load_scenario(args.scenario)
    report = run_comparison(config, threads=args.threads, config_echo=payload)
    prefix = Path(args.out_prefix)
    write_json(str(prefix) + ".report.json",
               {"version": __version__, **report.as_dict()})
    write_table_csv(
        str(prefix) + ".table.csv", __version__,
        {"command": "compare", "scenario": str(args.scenario),
         "master_seed": config.master_seed},
        ["method", "log_scale", "original_scale", "failures"],
        report.table_rows(),
    )
    return 0


def cmd_check_asymptotics(args) -> int:
    payload = load_json(args.config)
    scenario_fields = {
        k: payload[k]
        for k in ("model", "n", "design", "scale", "noise_sd_log",
                  "replicates", "master_seed", "kernel")
        if k in payload
    }
    # optional negative-control hook: generate with a different true sd
    # than the sigma handed to the asymptotic formulas
    if "generator_sd" in payload:
        scenario_fields["noise_sd_log"] = float(payload["generator_sd"])
    config = scenario_from_dict(scenario_fields, base_dir=Path(args.config).parent)
    degree = int(payload.get("degree", 1))
    h = float(payload.get("bandwidth", 0.2))
    x0 = float(payload.get("x0", 2.0))
    checks = payload.get("checks", ["bias", "variance"])
    tol = payload.get("tolerances", {})
    sigmas = float(tol.get("bias_mc_sigmas", 3.0))
    var_rel = float(tol.get("variance_rel", 0.10))

    density = config.density()
    noise = NoiseSpec(float(payload.get("noise_sd_log", config.noise_sd_log)))
    kernel = config.kernel
    from .bandwidth import asymptotic_bias, asymptotic_variance

    result = mc_bias_variance(config, x0, degree, h, "de", threads=args.threads)
    all_pass = True
    print(f"# dekernel {__version__} check-asymptotics (degree={degree}, h={fmt(h)}, "
          f"x0={fmt(x0)}, replicates={config.replicates})")
    print(f"{'check':<10} {'predicted':>14} {'empirical':>14} {'mc_se':>12} "
          f"{'ratio':>8}  status")
    if "bias" in checks:
        pred = asymptotic_bias(config.model, x0, degree, h, kernel, density)
        ok = abs(result.empirical_bias - pred) <= sigmas * result.se_bias
        all_pass &= ok
        ratio = result.empirical_bias / pred if pred != 0 else float("inf")
        print(f"{'bias':<10} {pred:>14.6g} {result.empirical_bias:>14.6g} "
              f"{result.se_bias:>12.3g} {ratio:>8.3f}  {'PASS' if ok else 'FAIL'}")
    if "variance" in checks:
        pred = asymptotic_variance(noise, config.n, h, kernel, density, x0)
        ok = abs(result.empirical_variance - pred) <= var_rel * pred
        all_pass &= ok
        ratio = result.empirical_variance / pred
        print(f"{'variance':<10} {pred:>14.6g} {result.empirical_variance:>14.6g} "
              f"{result.se_variance:>12.3g} {ratio:>8.3f}  {'PASS' if ok else 'FAIL'}")
    if "bandwidth_audit" in checks:
        from .errors import DegenerateBias

        try:
            audit = bandwidth_step_audit(config.model, x0, degree, config.n,
                                         noise, kernel, density)
            print(f"{'bw_audit':<10} {audit.h_direct_target:>14.6g} {audit.h_step:>14.6g} "
                  f"{'—':>12} {audit.ratio:>8.3f}  "
                  f"{'FLAGGED' if audit.mismatch_flagged else 'MATCH'}")
        except DegenerateBias as exc:
            print(f"{'bw_audit':<10} {'—':>14} {'—':>14} {'—':>12} {'—':>8}  "
                  f"DEGENERATE ({exc})")
    return 0 if all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dekernel",
        description="Growth-law-constrained local kernel regression toolkit",
    )
    parser.add_argument("--version", action="version", version=f"dekernel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a curve to x,y CSV data")
    p.add_argument("input", type=Path)
    p.add_argument("--method", required=True,
                   help="nw | ll | lq | poly | de1 | de2 | de:K")
    p.add_argument("--degree", type=int, help="polynomial degree for --method poly")
    p.add_argument("--kernel", default="epanechnikov",
                   choices=["epanechnikov", "biweight", "uniform"])
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--loocv", action="store_true")
    p.add_argument("--loocv-grid", help="comma-separated candidate bandwidths")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--estimate-params", action="store_true")
    p.add_argument("--grid", default="", help="start:stop:count (default: data span, 200)")
    p.add_argument("--scale", default="linear", choices=["linear", "log"])
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bandwidth", help="optimal/step/LOOCV bandwidth reports")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--direct", action="store_true")
    p.add_argument("--step", action="store_true")
    p.add_argument("--loocv", action="store_true")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0)
    p.add_argument("--g0", type=float, default=1.0)
    p.add_argument("--x", type=float, default=2.0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--interval", type=float, nargs=2, default=(0.0, 4.0))
    p.add_argument("--kernel", default="epanechnikov",
                   choices=["epanechnikov", "biweight", "uniform"])
    p.add_argument("--input", type=Path, help="x,y CSV for --loocv")
    p.add_argument("--method", default="ll", help="method for --loocv")
    p.add_argument("--h-grid", help="comma-separated bandwidths for --loocv")
    p.add_argument("--scale", default="linear", choices=["linear", "log"])
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("params", help="estimate growth-law parameters from x,y CSV")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--refine", action="store_true",
                   help="also report the log-scale trajectory refinement")
    p.add_argument("--refine-alpha", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("simulate", help="generate one replicate dataset from a scenario")
    p.add_argument("scenario", type=Path)
    p.add_argument("--replicate", type=int, default=1)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run the Monte-Carlo method comparison")
    p.add_argument("scenario", type=Path)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check-asymptotics",
                       help="compare predicted bias/variance against Monte Carlo")
    p.add_argument("config", type=Path)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=cmd_check_asymptotics)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"dekernel: file not found: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"dekernel: parse error: {exc}", file=sys.stderr)
        return 1
    except (DekernelError, ValueError) as exc:
        print(f"dekernel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
