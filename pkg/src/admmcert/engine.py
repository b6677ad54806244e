"""Generic over-relaxed ADMM execution over pluggable subproblem solvers.

The engine treats both subproblems as black boxes: the x side solves
``argmin f(x) + (rho/2) ||A x + v||^2`` and the z side solves
``argmin g(z) + (rho/2) ||B z + w||^2``, with the over-relaxed mixing
absorbed into ``v`` and ``w``. Closed-form quadratic instances, the
recursion validator, and empirical rate estimation live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .csvio import fmt_real, render_csv
from .errors import (
    DivergenceError,
    DomainError,
    EstimationError,
    SubproblemError,
    UnsupportedProblemError,
)
from .linalg import SymMatrix, extreme_eigs, sym_eigs

DIVERGENCE_LIMIT = 1e12

Solver = Callable[[np.ndarray, float], np.ndarray]
LinearMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProxProblem:
    """An ADMM instance described by its subproblem solvers.

    ``fhat_grad(r, rho)`` is the gradient of the normalized smooth term
    at ``r``; built-in quadratic constructors supply it so recursion
    validation has closed-form inputs. ``a_is_identity`` marks problems
    whose constraint map on x is the identity, which is what the
    strong-convexity regularizer needs to rewrite the x update.
    """

    x_solver: Solver
    z_solver: Solver
    a_apply: LinearMap
    b_apply: LinearMap
    c: np.ndarray
    dim_x: int
    dim_z: int
    dim_r: int
    fhat_grad: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    a_is_identity: bool = False


@dataclass(frozen=True)
class AdmmState:
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class StoppingRule:
    """Termination policy for :func:`run`.

    Stops when both the primal residual ``||Ax + Bz - c||`` and the dual
    residual ``||B(z_k - z_{k-1})||`` fall to ``tol`` (``None`` disables
    residual stopping), or when ``||z - reference_z|| <= ref_tol``, or
    at ``max_iters``, whichever comes first.
    """

    max_iters: int = 100_000
    tol: Optional[float] = 1e-10
    reference_z: Optional[np.ndarray] = None
    ref_tol: Optional[float] = None

    def __post_init__(self) -> None:
        if self.max_iters < 0:
            raise DomainError("max_iters must be nonnegative")
        if self.reference_z is not None and self.ref_tol is None:
            raise DomainError("ref_tol is required with reference_z")


@dataclass
class NormalizedTrace:
    """Per-iteration records of the normalized sequences.

    Row ``k`` holds ``r_k = A x_k``, ``s_k = B z_k``, ``u_k`` and
    ``z_k``; ``beta[k]`` is the normalized smooth-term gradient at
    ``r_k`` when the problem exposes it (the matching subgradient of the
    other term is ``-u_k``). Residual columns mirror the CSV export;
    the dual residual is undefined at ``k = 0``.
    """

    r: np.ndarray
    s: np.ndarray
    u: np.ndarray
    z: np.ndarray
    c: np.ndarray
    primal_resid: np.ndarray
    dual_resid: np.ndarray
    beta: Optional[np.ndarray] = None
    dist_to_reference: Optional[np.ndarray] = None

    @property
    def iterations(self) -> int:
        return self.r.shape[0] - 1


def admm_step(
    problem: ProxProblem, state: AdmmState, rho: float, alpha: float
) -> AdmmState:
    """One over-relaxed ADMM update of ``(x, z, u)``."""
    if rho <= 0.0:
        raise DomainError("rho must be positive")
    bz = problem.b_apply(state.z)
    try:
        x_new = problem.x_solver(bz - problem.c + state.u, rho)
        ax = problem.a_apply(x_new)
        mix = alpha * ax - (1.0 - alpha) * bz - alpha * problem.c
        z_new = problem.z_solver(mix + state.u, rho)
    except Exception as exc:  # propagate with the iteration index attached
        raise SubproblemError(
            f"subproblem solver failed at iteration {state.k}: {exc}",
            iteration=state.k,
        ) from exc
    u_new = state.u + mix + problem.b_apply(z_new)
    return AdmmState(x=x_new, z=z_new, u=u_new, k=state.k + 1)


def initial_state(problem: ProxProblem) -> AdmmState:
    return AdmmState(
        x=np.zeros(problem.dim_x),
        z=np.zeros(problem.dim_z),
        u=np.zeros(problem.dim_r),
        k=0,
    )


def run(
    problem: ProxProblem,
    rho: float,
    alpha: float,
    stop: StoppingRule,
    initial: Optional[AdmmState] = None,
) -> tuple[AdmmState, NormalizedTrace]:
    """Iterate ADMM until the stopping rule fires.

    Returns the final state and the trace of normalized sequences.
    Raises :class:`DivergenceError` when iterates exceed ``1e12`` in
    magnitude.
    """
    state = initial if initial is not None else initial_state(problem)
    rs, ss, us, zs, betas = [], [], [], [], []
    primal, dual, dists = [], [], []
    has_beta = problem.fhat_grad is not None

    def record(st: AdmmState, dual_r: float) -> tuple[float, Optional[float]]:
        r = problem.a_apply(st.x)
        s = problem.b_apply(st.z)
        rs.append(r)
        ss.append(s)
        us.append(st.u)
        zs.append(st.z)
        if has_beta:
            betas.append(problem.fhat_grad(r, rho))
        p = float(np.linalg.norm(r + s - problem.c))
        primal.append(p)
        dual.append(dual_r)
        d = None
        if stop.reference_z is not None:
            d = float(np.linalg.norm(st.z - stop.reference_z))
            dists.append(d)
        return p, d

    def should_stop(p: float, dual_r: float, d: Optional[float]) -> bool:
        if stop.tol is not None and p <= stop.tol and dual_r <= stop.tol:
            return True
        return d is not None and d <= stop.ref_tol

    p0, d0 = record(state, math.inf)
    if not should_stop(p0, math.inf, d0):
        for _ in range(stop.max_iters):
            prev_z = state.z
            state = admm_step(problem, state, rho, alpha)
            size = max(
                np.abs(state.x).max(), np.abs(state.z).max(), np.abs(state.u).max()
            )
            if not np.isfinite(size) or size > DIVERGENCE_LIMIT:
                raise DivergenceError(
                    f"iterates exceeded {DIVERGENCE_LIMIT:g} at iteration {state.k}",
                    iteration=state.k,
                )
            dual_r = float(np.linalg.norm(problem.b_apply(state.z - prev_z)))
            p, d = record(state, dual_r)
            if should_stop(p, dual_r, d):
                break
    trace = NormalizedTrace(
        r=np.asarray(rs),
        s=np.asarray(ss),
        u=np.asarray(us),
        z=np.asarray(zs),
        c=problem.c,
        primal_resid=np.asarray(primal),
        dual_resid=np.asarray(dual),
        beta=np.asarray(betas) if has_beta else None,
        dist_to_reference=np.asarray(dists) if stop.reference_z is not None else None,
    )
    return state, trace


@dataclass(frozen=True)
class QuadraticInstance:
    """Diagonalizable worst-case instance: quadratic plus a ridge term.

    The smooth term is ``x -> x^T Q x / 2`` with ``Q`` positive
    definite, the other term ``z -> delta ||z||^2 / 2``, coupled by
    ``x - z = 0``. The unique solution is the origin.
    """

    Q: SymMatrix
    delta: float
    rho: float
    alpha: float

    def __post_init__(self) -> None:
        if self.delta < 0.0:
            raise DomainError("delta must be nonnegative")
        if self.rho <= 0.0:
            raise DomainError("rho must be positive")
        n = self.Q.n
        lam_min = (
            sym_eigs(self.Q)[0] if n <= 8 else extreme_eigs(self.Q, tol=1e-10)[0]
        )
        if lam_min <= 0.0:
            raise DomainError("Q must be positive definite")


def quadratic_step(
    inst: QuadraticInstance, z: np.ndarray, u: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form ADMM update for the quadratic instance."""
    q, delta, rho, alpha = inst.Q.array, inst.delta, inst.rho, inst.alpha
    x_new = rho * np.linalg.solve(q + rho * np.eye(q.shape[0]), z - u)
    z_new = rho / (delta + rho) * (alpha * x_new + (1.0 - alpha) * z + u)
    u_new = u + alpha * x_new + (1.0 - alpha) * z - z_new
    return x_new, z_new, u_new


def quadratic_problem(inst: QuadraticInstance) -> ProxProblem:
    """The quadratic instance as a generic :class:`ProxProblem`."""
    q = inst.Q.array
    d = q.shape[0]
    delta = inst.delta

    def x_solver(v: np.ndarray, rho: float) -> np.ndarray:
        return np.linalg.solve(q + rho * np.eye(d), -rho * v)

    def z_solver(w: np.ndarray, rho: float) -> np.ndarray:
        return rho * w / (delta + rho)

    return ProxProblem(
        x_solver=x_solver,
        z_solver=z_solver,
        a_apply=lambda x: x,
        b_apply=lambda z: -z,
        c=np.zeros(d),
        dim_x=d,
        dim_z=d,
        dim_r=d,
        fhat_grad=lambda r, rho: q @ r / rho,
        a_is_identity=True,
    )


def validate_dynamics(trace: NormalizedTrace, alpha: float) -> float:
    """Largest residual of the two-state recursion along a trace.

    Checks, for every recorded step, the three identities tying
    ``(r, s, u)`` to the recovered gradient/subgradient pair. Requires a
    trace with closed-form gradients (quadratic smooth term).
    """
    if trace.beta is None:
        raise UnsupportedProblemError(
            "recursion validation needs closed-form gradients; "
            "the problem did not provide fhat_grad"
        )
    n = trace.iterations
    if n == 0:
        return 0.0
    r, s, u, beta, c = trace.r, trace.s, trace.u, trace.beta, trace.c
    gamma = -u[1:]
    res_r = r[1:] + s[:-1] + u[:-1] - c + beta[1:]
    res_s = s[1:] - s[:-1] + (1.0 - alpha) * u[:-1] - alpha * beta[1:] + gamma
    res_u = u[1:] + gamma
    worst = 0.0
    for res in (res_r, res_s, res_u):
        worst = max(worst, float(np.abs(res).max()))
    return worst


def empirical_rate(trace: NormalizedTrace, reference: np.ndarray) -> float:
    """Empirical linear rate of ``(z_k, u_k)`` toward a reference point.

    Fits a least-squares line to the log distance over the last half of
    the trace and returns the exponentiated slope. The trace must hold
    at least 20 iterations and decrease the distance below 1e-3 of its
    initial value; otherwise an :class:`EstimationError` is raised.
    """
    phi_ref = np.asarray(reference, dtype=float)
    phi = np.hstack([trace.z, trace.u])
    if phi_ref.shape != (phi.shape[1],):
        raise DomainError(
            f"reference must have length {phi.shape[1]}, got {phi_ref.shape}"
        )
    dist = np.linalg.norm(phi - phi_ref, axis=1)
    n = trace.iterations
    if dist[0] == 0.0:
        raise EstimationError("initial distance to the reference is zero")
    if n < 20:
        raise EstimationError(f"need at least 20 iterations, trace has {n}")
    if dist[-1] > 1e-3 * dist[0]:
        raise EstimationError(
            "trace did not decrease below 1e-3 of the initial distance"
        )
    start = n // 2
    window = dist[start:]
    if np.any(window <= 0.0):
        raise EstimationError("distance hit zero inside the fit window")
    ks = np.arange(start, n + 1, dtype=float)
    slope = np.polyfit(ks, np.log(window), 1)[0]
    return float(np.exp(slope))


def regularize(problem: ProxProblem, delta: float) -> ProxProblem:
    """Add ``delta/2 ||x||^2`` to the smooth term.

    Only the x update changes: completing the square folds the ridge
    into a rescaled argument and penalty for the original solver. The
    rewrite needs the constraint map on x to be the identity.
    """
    if delta < 0.0:
        raise DomainError("delta must be nonnegative")
    if delta == 0.0:
        return problem
    if not problem.a_is_identity:
        raise UnsupportedProblemError(
            "regularization is implemented for identity constraint maps only"
        )
    base_solver = problem.x_solver
    base_grad = problem.fhat_grad

    def x_solver(v: np.ndarray, rho: float) -> np.ndarray:
        return base_solver(rho * v / (rho + delta), rho + delta)

    fhat_grad = None
    if base_grad is not None:

        def fhat_grad(r: np.ndarray, rho: float) -> np.ndarray:
            return base_grad(r, rho) + delta * r / rho

    return ProxProblem(
        x_solver=x_solver,
        z_solver=problem.z_solver,
        a_apply=problem.a_apply,
        b_apply=problem.b_apply,
        c=problem.c,
        dim_x=problem.dim_x,
        dim_z=problem.dim_z,
        dim_r=problem.dim_r,
        fhat_grad=fhat_grad,
        a_is_identity=True,
    )


def trace_csv(trace: NormalizedTrace) -> str:
    """Render a trace as CSV: one row per iteration, 17 significant digits.

    The ``dist_to_reference`` column appears only when the run tracked a
    reference; the dual residual is ``NA`` on the initial row.
    """
    header = ["k", "primal_residual", "dual_residual"]
    with_dist = trace.dist_to_reference is not None
    if with_dist:
        header.append("dist_to_reference")
    rows = []
    for k in range(trace.iterations + 1):
        dual = trace.dual_resid[k]
        row = [
            str(k),
            fmt_real(trace.primal_resid[k]),
            fmt_real(None if math.isinf(dual) else dual),
        ]
        if with_dist:
            row.append(fmt_real(trace.dist_to_reference[k]))
        rows.append(row)
    return render_csv(header, rows)
