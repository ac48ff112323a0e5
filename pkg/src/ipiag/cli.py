"""Command-line harness.

Three subcommands:

``run``      execute one configuration on a problem document, writing
             ``trace.csv``, ``summary.json``, and optionally ``plot.svg``
             (squared distance vs iteration, log scale, with the
             certificate envelope rho^k C dash-dotted).
``compare``  execute several configurations sharing one problem and emit a
             table with iterations-to-threshold columns, averaged over
             seeded repetitions when the schedule is randomized.
``certify``  print the step-size certificate for given (L, beta, tau, C1)
             without running anything.

Exit codes: 0 success, 2 configuration error, 3 divergence guard fired,
4 a certificate bound check ran and failed.

The ``compare`` spec file is JSON:

    {
      "problem": "path/to/problem.json" | {inline document},
      "iters": 10000,
      "schedule": {"type": "uniform1", "tau": 4, "workers": 4},
      "repetitions": 10,
      "base_seed": 0,
      "reference": {"alpha": 0.002, "iters": 200000, "tol": 1e-10},
      "configs": [
        {"label": "piag", "variant": "piag", "alpha": "auto"},
        {"label": "ipiag", "variant": "ipiag", "alpha": "auto", "c1": 0.25}
      ]
    }

``reference`` is only needed when the problem document carries no known
optimum; it is solved once with the synchronous method and shared by all
rows.  Repetitions collapse to 1 for the deterministic sync schedule.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import problems
from .core import CompositeProblem, DivergenceError, load_problem, problem_from_document
from .rates import RateInputs, certificate_for, ipiag_certificate, verify_linear_bound
from .schedules import DelaySchedule, schedule_synchronous, schedule_uniform_single
from .solver import SolverParams, iterations_to_threshold, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_BOUND = 4

RUN_VARIANTS = ("piag", "piag-m", "piag-nel", "ipiag")
_CERT_VARIANT = {"piag": "t1", "piag-m": "cor1", "piag-nel": "cor2", "ipiag": "t1"}


class ConfigError(ValueError):
    """Invalid combination of flags, spec fields, or problem metadata."""


def _parse_value(text, name: str):
    """'auto' stays a sentinel; anything else must parse as a float."""
    if text is None or text == "auto":
        return "auto"
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number or 'auto', got {text!r}") from None


def resolve_parameters(
    problem: CompositeProblem,
    variant: str,
    alpha_arg,
    eta1_arg,
    eta2_arg,
    tau: int,
    c1: float,
):
    """Turn flag values into concrete (alpha, eta1, eta2, certificate).

    The certificate is rebuilt at the resolved values so its contraction
    factor describes the run that will actually execute; it is None when
    the problem has no growth modulus (then bound checks are skipped).
    """
    if variant not in RUN_VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    alpha_arg = _parse_value(alpha_arg, "alpha")
    eta1_arg = _parse_value(eta1_arg, "eta1")
    eta2_arg = _parse_value(eta2_arg, "eta2")

    uses_eta1 = variant in ("piag-m", "ipiag")
    uses_eta2 = variant in ("piag-nel", "ipiag")
    beta = problem.growth_constant
    L = problem.total_lipschitz
    needs_auto = alpha_arg == "auto" or (uses_eta1 and eta1_arg == "auto") or (
        uses_eta2 and eta2_arg == "auto"
    )
    if needs_auto and beta is None:
        raise ConfigError(
            "auto parameters need the growth modulus; the problem metadata has none"
        )

    cert_variant = _CERT_VARIANT[variant]
    c1_eff = c1 if uses_eta1 else 0.0
    auto_cert = None
    if needs_auto:
        inputs = RateInputs(L, beta, tau, c1_eff)
        auto_cert = certificate_for(cert_variant, inputs)

    alpha = auto_cert.alpha if alpha_arg == "auto" else alpha_arg
    if not alpha > 0:
        raise ConfigError("alpha must be positive")
    if alpha_arg != "auto" and auto_cert is not None:
        # eta defaults must be computed at the alpha that will run
        auto_cert = certificate_for(cert_variant, auto_cert.inputs, alpha=alpha)

    if uses_eta1:
        eta1 = auto_cert.eta1 if eta1_arg == "auto" else eta1_arg
    else:
        if eta1_arg not in ("auto", 0.0):
            raise ConfigError(f"variant {variant} has no pre-prox inertia; leave eta1 at 0")
        eta1 = 0.0
    if uses_eta2:
        eta2 = auto_cert.eta2 if eta2_arg == "auto" else eta2_arg
    else:
        if eta2_arg not in ("auto", 0.0):
            raise ConfigError(f"variant {variant} has no post-prox inertia; leave eta2 at 0")
        eta2 = 0.0
    if not 0.0 <= eta1 <= 1.0 or not 0.0 <= eta2 <= 1.0:
        raise ConfigError("inertial weights must lie in [0, 1]")

    cert = None
    if beta is not None:
        implied_c1 = eta1 / (alpha * beta) if uses_eta1 and alpha * beta > 0 else 0.0
        try:
            inputs = RateInputs(L, beta, tau, implied_c1)
            cert = certificate_for(cert_variant, inputs, alpha=alpha, eta2=eta2)
            # pin the exact run values; the universal contraction formula
            # (1 + eta2) / (1 + alpha beta - eta1) covers every variant
            cert.eta1 = eta1
            cert.eta2 = eta2
            cert.rho = (1.0 + eta2) / (1.0 + alpha * beta - eta1)
            cert.admissible = bool(cert.admissible and eta1 + eta2 < alpha * beta)
        except ValueError:
            cert = None
    return alpha, eta1, eta2, cert


def build_schedule(kind: str, workers: int, tau: int, iters: int, seed: int) -> DelaySchedule:
    if kind == "sync":
        if tau != 0:
            raise ConfigError("the sync schedule has no staleness; use --tau 0")
        return schedule_synchronous(workers, iters)
    if kind == "uniform1":
        return schedule_uniform_single(workers, tau, iters, seed)
    raise ConfigError(f"unknown schedule kind {kind!r}")


def _load_problem_arg(source) -> CompositeProblem:
    try:
        if isinstance(source, dict):
            return problem_from_document(source)
        return load_problem(source)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot load problem: {exc}") from None


def cmd_run(args) -> int:
    t0 = time.time()
    try:
        problem = _load_problem_arg(args.problem)
        if not 1 <= args.workers <= problem.num_components:
            raise ConfigError("workers must lie in [1, num_components]")
        if args.tau < 0 or args.iters < 0:
            raise ConfigError("tau and iters must be nonnegative")
        alpha, eta1, eta2, cert = resolve_parameters(
            problem, args.variant, args.alpha, args.eta1, args.eta2, args.tau, args.c1
        )
        schedule = build_schedule(args.schedule, args.workers, args.tau, args.iters, args.seed)
        params = SolverParams(alpha=alpha, eta1=eta1, eta2=eta2, max_iters=args.iters)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out, exist_ok=True)
    status = "ok"
    trace = None
    exit_code = EXIT_OK
    try:
        trace = run(problem, params, schedule, np.zeros(problem.dimension))
    except DivergenceError as exc:
        print(f"error: diverged: {exc}", file=sys.stderr)
        status = "diverged"
        exit_code = EXIT_DIVERGED

    verdicts = {"psi": "skipped", "phi_gap": "skipped", "dist2": "skipped"}
    report = None
    if trace is not None:
        if cert is not None and trace.phi_star is not None and trace.records >= 2:
            report = verify_linear_bound(trace, cert)
            cert.lyapunov_constant = report.constant
            verdicts = {
                "psi": "pass" if report.psi_ok else "fail",
                "phi_gap": "pass" if report.phi_ok else "fail",
                "dist2": "pass" if report.dist_ok else "fail",
            }
            if not report.ok:
                exit_code = EXIT_BOUND
        trace.to_csv(os.path.join(args.out, "trace.csv"))

    summary = {
        "status": status,
        "variant": args.variant,
        "alpha": alpha,
        "eta1": eta1,
        "eta2": eta2,
        "schedule": {
            "type": args.schedule,
            "tau": args.tau,
            "workers": args.workers,
            "seed": args.seed,
        },
        "iters_executed": None if trace is None else trace.records - 1,
        "final_phi": None if trace is None else float(trace.phi[-1]),
        "final_phi_gap": None,
        "final_dist2": None,
        "iterations_to_1e-6": None,
        "certificate": None if cert is None else cert.to_json_dict(),
        "bound_checks": verdicts,
        "wall_clock_sec": time.time() - t0,
    }
    if trace is not None:
        if trace.phi_star is not None:
            summary["final_phi_gap"] = float(trace.phi[-1] - trace.phi_star)
        if np.isfinite(trace.dist2[-1]):
            summary["final_dist2"] = float(trace.dist2[-1])
            hit = iterations_to_threshold(trace.dist2, 1e-6)
            summary["iterations_to_1e-6"] = hit
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    if args.plot and trace is not None and trace.records >= 2:
        curves = []
        if np.isfinite(trace.dist2).any():
            curves.append({"label": "dist^2", "x": trace.k, "y": trace.dist2})
            ylabel = "squared distance"
        else:
            curves.append({"label": "objective", "x": trace.k, "y": trace.phi})
            ylabel = "objective"
        if report is not None:
            env = report.constant * report.rho ** np.asarray(trace.k, dtype=float)
            scale = 2.0 * cert.alpha / (1.0 - cert.eta1)
            curves.append(
                {"label": "certificate bound", "x": trace.k, "y": scale * env, "dashed": True}
            )
        from .plotting import log_line_plot

        log_line_plot(
            os.path.join(args.out, "plot.svg"),
            curves,
            title=f"{args.variant} on {os.path.basename(str(args.problem))}",
            ylabel=ylabel,
        )

    checks = ",".join(f"{k}={v}" for k, v in verdicts.items())
    print(
        f"{args.variant}: status={status} iters={summary['iters_executed']} "
        f"final_phi={summary['final_phi']} checks[{checks}] -> {args.out}"
    )
    return exit_code


def _mean_or_none(values) -> float:
    vals = [v for v in values if v is not None]
    if len(vals) != len(values) or not vals:
        return None
    return float(np.mean(vals))


def cmd_compare(args) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        configs = spec.get("configs", [])
        if len(configs) < 2:
            raise ConfigError("compare needs at least two configs")
        problem = _load_problem_arg(spec["problem"])
        iters = int(spec.get("iters", 1000))
        sched = spec.get("schedule", {})
        kind = sched.get("type", "uniform1")
        tau = int(sched.get("tau", 0))
        workers = int(sched.get("workers", 4))
        reps = int(spec.get("repetitions", 10))
        if args.repetitions is not None:
            reps = args.repetitions
        if kind == "sync" or reps < 1:
            reps = 1
        base_seed = int(spec.get("base_seed", 0))
        if not 1 <= workers <= problem.num_components:
            raise ConfigError("workers must lie in [1, num_components]")

        if problem.known_optimum is not None:
            x_ref, phi_star = problem.known_optimum
        else:
            ref = spec.get("reference")
            if not ref or "alpha" not in ref:
                raise ConfigError(
                    "problem has no known optimum; give a reference block with an alpha"
                )
            x_ref, phi_star = problems.reference_solution(
                problem,
                float(ref["alpha"]),
                max_iters=int(ref.get("iters", 200000)),
                tol=float(ref.get("tol", 1e-10)),
            )

        resolved = []
        for cfg in configs:
            variant = cfg.get("variant", "piag")
            alpha, eta1, eta2, cert = resolve_parameters(
                problem,
                variant,
                cfg.get("alpha", "auto"),
                cfg.get("eta1", "auto"),
                cfg.get("eta2", "auto"),
                tau,
                float(cfg.get("c1", 0.25)),
            )
            resolved.append((cfg.get("label", variant), variant, alpha, eta1, eta2, cert))
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows = []
    for label, variant, alpha, eta1, eta2, cert in resolved:
        hits4, hits6, gaps = [], [], []
        params = SolverParams(alpha=alpha, eta1=eta1, eta2=eta2, max_iters=iters)
        for r in range(reps):
            try:
                schedule = build_schedule(kind, workers, tau, iters, base_seed + r)
            except ConfigError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            try:
                trace = run(
                    problem,
                    params,
                    schedule,
                    np.zeros(problem.dimension),
                    x_ref=x_ref,
                    phi_star=phi_star,
                    store_iterates=False,
                )
            except DivergenceError as exc:
                print(f"error: config {label!r} diverged: {exc}", file=sys.stderr)
                return EXIT_DIVERGED
            hits4.append(iterations_to_threshold(trace.dist2, 1e-4))
            hits6.append(iterations_to_threshold(trace.dist2, 1e-6))
            gaps.append(float(trace.phi[-1] - phi_star))
        rows.append(
            {
                "label": label,
                "variant": variant,
                "alpha": alpha,
                "eta1": eta1,
                "eta2": eta2,
                "rho": None if cert is None else cert.rho,
                "iters_to_1e-4": _mean_or_none(hits4),
                "iters_to_1e-6": _mean_or_none(hits6),
                "final_gap": float(np.mean(gaps)),
            }
        )

    header = [
        "label",
        "variant",
        "alpha",
        "eta1",
        "eta2",
        "rho",
        "iters_to_1e-4",
        "iters_to_1e-6",
        "final_gap",
    ]
    digits = int(os.environ.get("IPIAG_FLOAT_DIGITS", "17"))

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return f"%.{digits}g" % v
        return str(v)

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell(row[h]) for h in header))
    table = "\n".join(lines) + "\n"
    out_dir = args.out or spec.get("out")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "compare.csv"), "w", encoding="utf-8") as fh:
            fh.write(table)
    sys.stdout.write(table)
    return EXIT_OK


def cmd_certify(args) -> int:
    try:
        inputs = RateInputs(args.L, args.beta, args.tau, args.c1)
        cert = certificate_for(args.variant, inputs)
        doc = cert.to_json_dict()
        if args.variant in ("t1", "t1tight"):
            doc["alpha0_stated"] = ipiag_certificate(inputs, tight=False).alpha_max
            doc["alpha0_tight"] = ipiag_certificate(inputs, tight=True).alpha_max
        else:
            doc["alpha0_stated"] = cert.alpha_max
            doc["alpha0_tight"] = cert.alpha_max
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipiag",
        description="Inertial aggregated proximal-gradient runs, comparisons, and certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration and write artifacts")
    p_run.add_argument("--problem", required=True, help="problem document (JSON file)")
    p_run.add_argument("--variant", choices=RUN_VARIANTS, default="piag")
    p_run.add_argument("--alpha", default="auto", help="step size, or 'auto'")
    p_run.add_argument("--eta1", default="auto", help="pre-prox inertia, or 'auto'")
    p_run.add_argument("--eta2", default="auto", help="post-prox inertia, or 'auto'")
    p_run.add_argument("--tau", type=int, default=0, help="staleness bound")
    p_run.add_argument("--workers", type=int, default=4)
    p_run.add_argument("--schedule", choices=("sync", "uniform1"), default="uniform1")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--iters", type=int, default=1000)
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--plot", action="store_true", help="also write plot.svg")
    p_run.add_argument(
        "--c1", type=float, default=0.25, help="momentum fraction behind auto eta1"
    )
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several configs and tabulate")
    p_cmp.add_argument("--spec", required=True, help="comparison spec (JSON file)")
    p_cmp.add_argument("--out", default=None, help="directory for compare.csv")
    p_cmp.add_argument(
        "--repetitions", type=int, default=None, help="override the spec's repetition count"
    )
    p_cmp.set_defaults(func=cmd_compare)

    p_cert = sub.add_parser("certify", help="print a step-size certificate")
    p_cert.add_argument("--L", type=float, required=True, help="total smoothness constant")
    p_cert.add_argument("--beta", type=float, required=True, help="growth modulus")
    p_cert.add_argument("--tau", type=int, required=True, help="staleness bound")
    p_cert.add_argument("--c1", type=float, default=0.0, help="momentum fraction")
    p_cert.add_argument(
        "--variant", choices=("t1", "t1tight", "cor1", "cor2"), default="t1"
    )
    p_cert.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
