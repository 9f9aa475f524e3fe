"""Command-line front end: ``check``, ``run``, ``sweep``, ``lemmas``.

Exit codes: 0 success, 1 conditions unsatisfied / verification or
inequality failures, 2 usage or configuration errors, 3 solution blow-up.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from . import __version__
from .analysis import (
    fit_exponential,
    run_inequality_suite,
    verify_exponential,
    verify_polynomial,
)
from .config import ConfigError, ExperimentConfig, gain_report_for, load_config
from .controllers import FourierModes, Nodal, NoControl
from .integrator import RunResult, run
from .kernels import backend
from .models import Family

# Inequality-suite keys that must hold; the remaining key records the
# stated-but-unprovable variant of the mean-plus-gradient bound and is
# reported for information only.
MANDATORY_LEMMAS = (
    "element_mean_approx",
    "mean_plus_gradient_corrected",
    "paired_point_differences",
    "point_sampling_norm",
    "spectral_tail",
    "poincare",
)

CSV_HEADER = "t,kinetic,grad,quadratic,lp,controller,total,stab_norm,lyapunov"


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def write_trajectory(path: str, result: RunResult) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in result.records:
            fh.write(
                ",".join(
                    [
                        _fmt(r.t),
                        _fmt(r.kinetic),
                        _fmt(r.grad),
                        _fmt(r.quadratic),
                        _fmt(r.lp),
                        _fmt(r.controller),
                        _fmt(r.total),
                        _fmt(r.stab_norm),
                        _fmt(r.lyapunov),
                    ]
                )
                + "\n"
            )


def _verify(cfg: ExperimentConfig, report, result: RunResult) -> tuple[Optional[dict], Optional[dict], bool]:
    """Fit the recorded decay and test it against the predicted rate.

    Returns (fit_dict, verify_dict, ok).  Verification runs whenever a
    prediction exists, even with unsatisfied gain conditions — the
    conditions are sufficient, not necessary, so sweeps can legitimately
    observe decay below the certified threshold.
    """
    t_end = cfg.stepper.t_end
    window = cfg.analysis.window(t_end)
    fit_dict = None
    try:
        fit = fit_exponential(result.records, window=window)
        fit_dict = dataclasses.asdict(fit)
    except ValueError as exc:
        fit = None
        fit_dict = {"error": str(exc)}

    if report is None:
        return fit_dict, None, True

    if isinstance(cfg.controller, Nodal):
        ok = fit is not None and fit.rate > 0.0 and fit.r_squared >= 0.95
        verify = {
            "kind": "qualitative",
            "ok": ok,
            "criterion": "fitted rate > 0 with r_squared >= 0.95",
        }
        return fit_dict, verify, ok

    if (
        isinstance(cfg.controller, FourierModes)
        and cfg.model.family is Family.NONLINEAR_DAMPING
    ):
        lo, hi = window
        lo = max(1.0, lo)
        try:
            res = verify_polynomial(result.records, report.predicted_rate, window=(lo, hi))
        except ValueError as exc:
            return fit_dict, {"kind": "polynomial", "ok": False, "error": str(exc)}, False
        verify = {"kind": "polynomial", **dataclasses.asdict(res)}
        return fit_dict, verify, res.ok

    try:
        res = verify_exponential(
            result.records,
            report.predicted_rate,
            safety=cfg.analysis.safety,
            window=window,
        )
    except ValueError as exc:
        return fit_dict, {"kind": "exponential", "ok": False, "error": str(exc)}, False
    verify = {"kind": "exponential", **dataclasses.asdict(res)}
    return fit_dict, verify, res.ok


def _execute(cfg: ExperimentConfig, out_dir: str) -> tuple[dict, int]:
    """Shared run pipeline: simulate, write artifacts, decide the exit code."""
    os.makedirs(out_dir, exist_ok=True)
    report = gain_report_for(cfg)
    t0 = time.perf_counter()
    result = run(cfg.model, cfg.controller, cfg.u0, cfg.u1, cfg.stepper)
    wall = time.perf_counter() - t0

    write_trajectory(os.path.join(out_dir, "trajectory.csv"), result)

    if result.blew_up:
        doc = {
            "backend": backend(),
            "version": __version__,
            "variant": cfg.variant,
            "config": cfg.raw,
            "gain": report.to_dict() if report else None,
            "blowup": {"blew_up": True, "time": result.blowup_time},
            "records": len(result.records),
            "fit": None,
            "verify": None,
            "wall_time_s": wall,
        }
        code = 3
    else:
        fit_dict, verify, verify_ok = _verify(cfg, report, result)
        satisfied = report.satisfied if report else True
        doc = {
            "backend": backend(),
            "version": __version__,
            "variant": cfg.variant,
            "config": cfg.raw,
            "gain": report.to_dict() if report else None,
            "blowup": {"blew_up": False, "time": None},
            "records": len(result.records),
            "fit": fit_dict,
            "verify": verify,
            "wall_time_s": wall,
        }
        code = 0 if (satisfied and verify_ok) else 1

    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return doc, code


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    cfg = load_config(args.config)
    report = gain_report_for(cfg)
    if report is None:
        print("error: config has no controller to check", file=sys.stderr)
        return 2
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.satisfied else 1


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    doc, code = _execute(cfg, args.out)
    gain = doc["gain"]
    if gain is not None:
        state = "satisfied" if gain["satisfied"] else "NOT satisfied"
        print(f"gain conditions: {state}")
    if doc["blowup"]["blew_up"]:
        print(f"solution blew up at t = {doc['blowup']['time']:.6g}")
    elif doc["fit"] is not None and "rate" in doc["fit"]:
        print(
            f"fitted rate = {doc['fit']['rate']:.6g}"
            f" (r^2 = {doc['fit']['r_squared']:.4f})"
        )
    if doc["verify"] is not None:
        print(f"verification ({doc['verify']['kind']}): {'ok' if doc['verify']['ok'] else 'FAILED'}")
    print(f"wrote {os.path.join(args.out, 'trajectory.csv')} and report.json")
    return code


def _apply_sweep_value(cfg: ExperimentConfig, param: str, value: float) -> ExperimentConfig:
    ctrl = cfg.controller
    if isinstance(ctrl, NoControl):
        raise ConfigError("cannot sweep a config with no controller")
    if param == "mu":
        new_ctrl = dataclasses.replace(ctrl, mu=float(value))
    else:  # param == "N"
        if value != int(value) or int(value) < 1:
            raise ConfigError(f"swept N values must be positive integers, got {value}")
        if not hasattr(ctrl, "N"):
            raise ConfigError(f"controller variant {cfg.variant!r} has no N to sweep")
        new_ctrl = dataclasses.replace(ctrl, N=int(value))
    return dataclasses.replace(cfg, controller=new_ctrl)


def _sweep_worker(config_path: str, param: str, value: float, out_dir: str) -> dict:
    cfg = _apply_sweep_value(load_config(config_path), param, value)
    doc, _code = _execute(cfg, out_dir)
    fit = doc["fit"]
    rate = fit.get("rate") if isinstance(fit, dict) else None
    verified = bool(doc["verify"]["ok"]) if doc["verify"] is not None else False
    gain = doc["gain"]
    return {
        "value": value,
        "gain_satisfied": bool(gain["satisfied"]) if gain else False,
        "fitted_rate": rate,
        "verified": verified,
    }


def _format_value(param: str, value: float) -> str:
    return str(int(value)) if param == "N" else format(value, "g")


def cmd_sweep(args) -> int:
    values: list[float] = []
    if args.values.strip():
        try:
            values = [float(s) for s in args.values.split(",")]
        except ValueError:
            print(f"error: --values must be a comma-separated list of numbers", file=sys.stderr)
            return 2
    # Validate the base config and the overrides before launching anything.
    base = load_config(args.config)
    for v in values:
        _apply_sweep_value(base, args.param, v)

    os.makedirs(args.out, exist_ok=True)
    jobs = []
    for v in values:
        sub = os.path.join(args.out, f"{args.param}={_format_value(args.param, v)}")
        jobs.append((args.config, args.param, v, sub))

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_worker, *zip(*jobs)))
    else:
        rows = [_sweep_worker(*j) for j in jobs]

    rows.sort(key=lambda r: r["value"])
    summary = os.path.join(args.out, "summary.csv")
    with open(summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value", "gain_satisfied", "fitted_rate", "verified"])
        for r in rows:
            writer.writerow(
                [
                    _format_value(args.param, r["value"]),
                    str(r["gain_satisfied"]).lower(),
                    "" if r["fitted_rate"] is None else repr(float(r["fitted_rate"])),
                    str(r["verified"]).lower(),
                ]
            )
    print(f"wrote {summary} ({len(rows)} rows)")
    return 0


def cmd_lemmas(args) -> int:
    reports = run_inequality_suite(args.seed, args.samples)
    name_w = max(len(k) for k in reports)
    print(f"{'inequality':<{name_w}}  samples  violations  worst_ratio  empirical")
    failures = 0
    for name, rep in reports.items():
        informational = name not in MANDATORY_LEMMAS
        if not informational and rep.violations > 0:
            failures += 1
        tag = "  (informational)" if informational else ""
        print(
            f"{name:<{name_w}}  {rep.samples:>7d}  {rep.violations:>10d}"
            f"  {rep.worst_ratio:>11.6f}  {rep.empirical_constant:>9.6f}{tag}"
        )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        doc = {
            "seed": args.seed,
            "samples": args.samples,
            "mandatory": list(MANDATORY_LEMMAS),
            "reports": {k: dataclasses.asdict(v) for k, v in reports.items()},
        }
        path = os.path.join(args.out, "lemmas.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote {path}")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavestab",
        description="Finite-parameter feedback stabilization of damped wave equations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="evaluate the gain conditions for a config")
    p_check.add_argument("--config", required=True, help="experiment INI file")
    p_check.set_defaults(func=cmd_check)

    p_run = sub.add_parser("run", help="simulate one config and verify the predicted decay")
    p_run.add_argument("--config", required=True, help="experiment INI file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="repeat a run over a range of controller parameters")
    p_sweep.add_argument("--config", required=True, help="experiment INI file")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--param", required=True, choices=("mu", "N"), help="parameter to sweep")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lem = sub.add_parser("lemmas", help="randomized checks of the discrete inequalities")
    p_lem.add_argument("--seed", type=int, default=42, help="base RNG seed")
    p_lem.add_argument("--samples", type=int, default=1000, help="samples per inequality")
    p_lem.add_argument("--out", default=None, help="optional directory for lemmas.json")
    p_lem.set_defaults(func=cmd_lemmas)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
