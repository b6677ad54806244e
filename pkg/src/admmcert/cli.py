"""Command-line interface.

Subcommands expose certification, bound evaluation, parameter sweeps
and the Lasso benchmark, writing CSV files that the plotting frontend
consumes. Exit codes: 0 on success, 1 on a domain failure, 2 on usage
errors. The ``ADMM_CERTIFY_THREADS`` environment variable caps sweep
parallelism (0 means automatic).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds, lasso
from .certify import (
    ConditioningSpec,
    RateCertificate,
    analytic_certificate,
    find_certificate,
    max_alpha,
    min_rate,
)
from .csvio import fmt_real, render_csv
from .engine import (
    AdmmState,
    QuadraticInstance,
    StoppingRule,
    empirical_rate,
    quadratic_problem,
    run,
)
from .errors import AdmmCertError, NoCertifiableAlphaError, UncertifiedError
from .linalg import SymMatrix

DESK_PROFILE = dict(n=120, p=100, N=5, nnz=50)
FULL_PROFILE = dict(n=600, p=500, N=5, nnz=250)
NOISE_STD = math.sqrt(1e-3)
MU_DEFAULT = 0.1


def _threads() -> int:
    raw = os.environ.get("ADMM_CERTIFY_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value <= 0:
        return 1
    return value


def _float_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return [float(t) for t in items]


def _cert_json(cert: RateCertificate) -> dict:
    p = cert.P.array
    return {
        "p11": p[0, 0],
        "p12": p[0, 1],
        "p22": p[1, 1],
        "lambda1": cert.lambda1,
        "lambda2": cert.lambda2,
        "tau": cert.tau,
    }


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=False))


def cmd_certify(args: argparse.Namespace) -> int:
    spec = ConditioningSpec(args.kappa, args.epsilon, args.alpha)
    if args.tau is not None:
        report = find_certificate(spec, args.tau)
        payload = {
            "kappa": spec.kappa,
            "epsilon": spec.epsilon,
            "alpha": spec.alpha,
            "tau": args.tau,
            "status": report.status,
            "residual": report.residual,
            "solver_iterations": report.solver_iterations,
        }
        if report.certificate is not None:
            payload["certificate"] = _cert_json(report.certificate)
        _emit(payload)
        return 0 if report.status == "certified" else 1
    tau_star, cert = min_rate(spec)
    _emit(
        {
            "kappa": spec.kappa,
            "epsilon": spec.epsilon,
            "alpha": spec.alpha,
            "tau_star": tau_star,
            "certificate": _cert_json(cert),
        }
    )
    return 0


def _rate_curve_rows(
    epsilons: Sequence[float], alpha: float, kappas: Sequence[float]
) -> list[list[str]]:
    rows = []
    for eps in epsilons:
        for kappa in kappas:
            spec = ConditioningSpec(kappa, eps, alpha)
            try:
                tau_star, _ = min_rate(spec)
                iters_proxy = -1.0 / math.log(tau_star)
            except (UncertifiedError, AdmmCertError):
                tau_star, iters_proxy = None, None
            tau_upper = (
                analytic_certificate(spec).tau if 0.0 < alpha < 2.0 else None
            )
            tau_lower = bounds.worst_case_construction(
                spec, m=1.0, L=kappa
            ).achieved_rate
            rows.append(
                [
                    fmt_real(kappa),
                    fmt_real(eps),
                    fmt_real(tau_star),
                    fmt_real(iters_proxy),
                    fmt_real(tau_upper),
                    fmt_real(tau_lower),
                ]
            )
    return rows


def cmd_rate_curve(args: argparse.Namespace) -> int:
    if args.points < 1 or args.kappa_min < 1.0 or args.kappa_max < args.kappa_min:
        raise AdmmCertError("need points >= 1 and 1 <= kappa-min <= kappa-max")
    if args.points >= 2 and args.kappa_max == args.kappa_min:
        raise AdmmCertError("kappa-max must exceed kappa-min for multiple points")
    kappas = np.geomspace(args.kappa_min, args.kappa_max, args.points)
    rows = _rate_curve_rows(args.epsilon_list, args.alpha, kappas)
    header = ["kappa", "epsilon", "tau_star", "iters_proxy", "tau_upper", "tau_lower"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "rate_curve.csv"
    path.write_text(render_csv(header, rows))
    print(path)
    return 0


def cmd_max_alpha(args: argparse.Namespace) -> int:
    if not args.kappa_list:
        raise AdmmCertError("kappa-list must not be empty")
    rows = []
    for kappa in args.kappa_list:
        try:
            best = max_alpha(kappa, args.epsilon)
        except NoCertifiableAlphaError:
            best = None
        rows.append([fmt_real(kappa), fmt_real(best)])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "max_alpha.csv"
    path.write_text(render_csv(["kappa", "alpha_max"], rows))
    print(path)
    return 0


def cmd_lasso(args: argparse.Namespace) -> int:
    profile = DESK_PROFILE if args.scale == "desk" else FULL_PROFILE
    inst = lasso.generate_instance(
        n=profile["n"],
        p=profile["p"],
        N=profile["N"],
        mu=MU_DEFAULT,
        nnz=profile["nnz"],
        noise_std=NOISE_STD,
        seed=args.seed,
    )
    alphas = np.linspace(0.1, 2.2, args.grid_alphas)
    # The desk profile keeps step sizes in the certificate-informative
    # band; the full profile spans the complete range.
    rho_hi = 10.0 if args.scale == "full" else 10.0**0.5
    rhos = np.geomspace(0.1, rho_hi, args.grid_rhos)
    results = lasso.run_grid(
        inst,
        alphas,
        rhos,
        target=args.target,
        budget=args.budget,
        workers=_threads(),
    )
    csv_text = lasso.grid_csv(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    certified_path = out / "lasso_certified.csv"
    iterations_path = out / "lasso_iterations.csv"
    certified_path.write_text(csv_text)
    iterations_path.write_text(csv_text)
    certified = [g for g in results if g.certified_tau is not None]
    recommendation: dict = {"alpha": None, "rho": None}
    if certified:
        best = min(certified, key=lambda g: (g.certified_tau, g.alpha, g.rho))
        recommendation = {
            "alpha": best.alpha,
            "rho": best.rho,
            "certified_tau": best.certified_tau,
        }
    _emit(
        {
            "certified_csv": str(certified_path),
            "iterations_csv": str(iterations_path),
            "recommended": recommendation,
        }
    )
    return 0


def cmd_quadratic(args: argparse.Namespace) -> int:
    spec = ConditioningSpec(args.kappa, args.epsilon, args.alpha)
    m, big_l = 1.0, args.kappa
    rho = math.sqrt(m * big_l) * spec.rho0
    mode = args.delta_mode
    if mode == "auto":
        mode = "zero" if args.epsilon >= 0.0 else "L"
    delta = 0.0 if mode == "zero" else big_l
    eig_candidates = [(bounds.t_matrix_eig(lam, delta, rho, args.alpha), lam)
                      for lam in (m, big_l)]
    predicted, slow_lam = max(eig_candidates, key=lambda t: abs(t[0]))
    inst = QuadraticInstance(
        Q=SymMatrix(np.diag([m, big_l])), delta=delta, rho=rho, alpha=args.alpha
    )
    problem = quadratic_problem(inst)
    z0 = np.array([1.0, 0.0]) if slow_lam == m else np.array([0.0, 1.0])
    state0 = AdmmState(x=np.zeros(2), z=z0, u=(delta / rho) * z0, k=0)
    stop = StoppingRule(
        max_iters=100_000, tol=None, reference_z=np.zeros(2), ref_tol=1e-8
    )
    _, trace = run(problem, rho, args.alpha, stop, initial=state0)
    measured = empirical_rate(trace, np.zeros(4))
    tau_star, _ = min_rate(spec)
    lower = bounds.lower_bound_rate(spec)
    ordering_ok = lower <= measured <= tau_star + 2e-3
    _emit(
        {
            "kappa": spec.kappa,
            "epsilon": spec.epsilon,
            "alpha": spec.alpha,
            "delta_mode": mode,
            "predicted_rate": predicted,
            "empirical_rate": measured,
            "certified_tau": tau_star,
            "lower_bound": lower,
            "ordering_ok": ordering_ok,
        }
    )
    if not ordering_ok:
        print("rate ordering violated: soundness failure", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admmcert",
        description="Certify and explore convergence rates of over-relaxed ADMM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    certify = sub.add_parser("certify", help="certify a rate or find the minimal one")
    certify.add_argument("--kappa", type=float, required=True)
    certify.add_argument("--epsilon", type=float, required=True)
    certify.add_argument("--alpha", type=float, required=True)
    certify.add_argument("--tau", type=float, default=None)
    certify.set_defaults(func=cmd_certify)

    curve = sub.add_parser("rate-curve", help="minimal rate across a kappa range")
    curve.add_argument("--epsilon-list", type=_float_list, required=True)
    curve.add_argument("--alpha", type=float, required=True)
    curve.add_argument("--kappa-min", type=float, required=True)
    curve.add_argument("--kappa-max", type=float, required=True)
    curve.add_argument("--points", type=int, required=True)
    curve.add_argument("--out", default=".")
    curve.set_defaults(func=cmd_rate_curve)

    amax = sub.add_parser("max-alpha", help="largest certifiable over-relaxation")
    amax.add_argument("--epsilon", type=float, required=True)
    amax.add_argument("--kappa-list", type=_float_list, required=True)
    amax.add_argument("--out", default=".")
    amax.set_defaults(func=cmd_max_alpha)

    las = sub.add_parser("lasso", help="distributed-Lasso parameter grid")
    las.add_argument("--scale", choices=["desk", "full"], default="desk")
    las.add_argument("--seed", type=int, default=7)
    las.add_argument("--grid-alphas", type=int, default=None)
    las.add_argument("--grid-rhos", type=int, default=None)
    las.add_argument("--target", type=float, default=1e-6)
    las.add_argument("--budget", type=int, default=1000)
    las.add_argument("--out", default=".")
    las.set_defaults(func=cmd_lasso)

    quad = sub.add_parser("quadratic", help="worst-case quadratic soundness check")
    quad.add_argument("--kappa", type=float, required=True)
    quad.add_argument("--epsilon", type=float, required=True)
    quad.add_argument("--alpha", type=float, required=True)
    quad.add_argument("--delta-mode", choices=["auto", "zero", "L"], default="auto")
    quad.set_defaults(func=cmd_quadratic)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "lasso":
        if args.grid_alphas is None:
            args.grid_alphas = 85 if args.scale == "full" else 8
        if args.grid_rhos is None:
            args.grid_rhos = 50 if args.scale == "full" else 10
    try:
        return args.func(args)
    except AdmmCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
