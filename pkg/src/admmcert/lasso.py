"""Distributed-Lasso benchmark: instances, references, parameter grids.

The benchmark solves ``sum_i ||A_i x_i - b_i||^2 / (2 mu) + ||z||_1``
subject to ``x_i = z`` in consensus form: the x block stacks the per
block variables, the constraint map on x is the identity, and the map
on z is minus a stack of identities, so the standing rank assumptions
hold by construction. Certified rates for each ``(alpha, rho)`` come
from the conditioning of the data blocks alone.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .certify import ConditioningSpec, min_rate
from .csvio import fmt_real, render_csv
from .engine import ProxProblem, StoppingRule, run
from .errors import (
    ConvergenceError,
    DomainError,
    RankDeficiencyError,
    UncertifiedError,
)
from .linalg import extreme_eigs

_GENERATION_ATTEMPTS = 3
_REFERENCE_BUDGET = 200_000
_EIG_TOL = 1e-10


@dataclass(frozen=True)
class LassoInstance:
    """Per-block design matrices and observations, plus the loss scale."""

    a_blocks: np.ndarray  # (N, n, p)
    b_blocks: np.ndarray  # (N, n)
    mu: float
    seed: int

    @property
    def n_blocks(self) -> int:
        return self.a_blocks.shape[0]

    @property
    def n_rows(self) -> int:
        return self.a_blocks.shape[1]

    @property
    def dim(self) -> int:
        return self.a_blocks.shape[2]


@dataclass(frozen=True)
class GridResult:
    """One grid point: certified rate and measured iteration count."""

    alpha: float
    rho: float
    certified_tau: Optional[float]
    iterations: Optional[int]
    final_error: float


def generate_instance(
    n: int,
    p: int,
    N: int,
    mu: float,
    nnz: int,
    noise_std: float,
    seed: int,
) -> LassoInstance:
    """Draw a random instance: normalized Gaussian blocks, sparse truth.

    Each block is standard normal with columns scaled to unit Euclidean
    norm; observations are the blocks applied to a vector with ``nnz``
    standard-normal entries at uniformly chosen positions, plus isotropic
    Gaussian noise. Deterministic for a given seed. On a rank-deficient
    draw the next seed is tried, up to three.
    """
    if not (n >= p >= nnz >= 0):
        raise DomainError("need n >= p >= nnz >= 0")
    if N < 1:
        raise DomainError("need at least one block")
    if mu <= 0.0:
        raise DomainError("mu must be positive")
    for attempt in range(_GENERATION_ATTEMPTS):
        rng = np.random.default_rng(seed + attempt)
        a = rng.standard_normal((N, n, p))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        x0 = np.zeros(p)
        support = rng.choice(p, size=nnz, replace=False)
        x0[support] = rng.standard_normal(nnz)
        b = a @ x0 + noise_std * rng.standard_normal((N, n))
        smallest = min(
            extreme_eigs(block.T @ block, tol=_EIG_TOL)[0] for block in a
        )
        if smallest > 1e-12:
            return LassoInstance(a_blocks=a, b_blocks=b, mu=mu, seed=seed + attempt)
    raise RankDeficiencyError(
        f"no full-rank draw in {_GENERATION_ATTEMPTS} attempts from seed {seed}"
    )


def conditioning(inst: LassoInstance) -> tuple[float, float, float]:
    """Strong convexity, smoothness and condition number of the loss.

    The Hessian is block diagonal with blocks ``A_i^T A_i / mu``, so the
    extremes are the per-block extremes scaled by ``1/mu``.
    """
    lo, hi = math.inf, 0.0
    for block in inst.a_blocks:
        lam_min, lam_max = extreme_eigs(block.T @ block, tol=_EIG_TOL)
        lo = min(lo, lam_min)
        hi = max(hi, lam_max)
    if lo <= 0.0:
        raise RankDeficiencyError("a data block is rank deficient")
    m, big_l = lo / inst.mu, hi / inst.mu
    return m, big_l, big_l / m


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def objective(inst: LassoInstance, z: np.ndarray) -> float:
    resid = inst.a_blocks @ z - inst.b_blocks
    return float(np.sum(resid * resid) / (2.0 * inst.mu) + np.abs(z).sum())


def reference_solution(inst: LassoInstance, tol: float = 1e-10) -> np.ndarray:
    """High-accuracy solution by accelerated proximal gradient.

    Independent of the ADMM engine: plain FISTA with gradient-based
    adaptive restart on the summed smooth term, stopped when the
    proximal-gradient fixed-point residual falls to ``tol``.
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    h = np.einsum("kij,kil->jl", inst.a_blocks, inst.a_blocks) / inst.mu
    hb = np.einsum("kij,ki->j", inst.a_blocks, inst.b_blocks) / inst.mu
    _, lip = extreme_eigs(h, tol=1e-8)
    step = 1.0 / lip
    z = np.zeros(inst.dim)
    y = z.copy()
    momentum = 1.0
    for _ in range(_REFERENCE_BUDGET):
        z_next = _soft_threshold(y - step * (h @ y - hb), step)
        resid = np.linalg.norm(z - _soft_threshold(z - step * (h @ z - hb), step))
        if resid / step <= tol:
            return z
        momentum_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum**2))
        y_next = z_next + (momentum - 1.0) / momentum_next * (z_next - z)
        if (y - z_next) @ (z_next - z) > 0.0:  # restart on momentum overshoot
            y_next = z_next.copy()
            momentum_next = 1.0
        z, y, momentum = z_next, y_next, momentum_next
    raise ConvergenceError(
        f"reference solve did not reach tol={tol} in {_REFERENCE_BUDGET} iterations",
        best_estimate=z,
    )


def consensus_problem(inst: LassoInstance) -> ProxProblem:
    """The instance in consensus ADMM form.

    x stacks the block variables (constraint map: identity), the z map
    is minus a stack of identities, so the x update separates per block
    and the z update is a soft threshold of the block mean. Per-rho
    factorizations of the block systems are cached.
    """
    n_blocks, _, p = inst.a_blocks.shape
    gram = np.stack([blk.T @ blk for blk in inst.a_blocks]) / inst.mu
    atb = np.einsum("kij,ki->kj", inst.a_blocks, inst.b_blocks) / inst.mu
    solve_cache: dict[float, np.ndarray] = {}

    def block_inverses(rho: float) -> np.ndarray:
        inv = solve_cache.get(rho)
        if inv is None:
            eye = np.eye(p)
            inv = np.stack([np.linalg.inv(g + rho * eye) for g in gram])
            solve_cache[rho] = inv
        return inv

    def x_solver(v: np.ndarray, rho: float) -> np.ndarray:
        inv = block_inverses(rho)
        rhs = atb - rho * v.reshape(n_blocks, p)
        return np.einsum("kij,kj->ki", inv, rhs).ravel()

    def z_solver(w: np.ndarray, rho: float) -> np.ndarray:
        w_bar = w.reshape(n_blocks, p).mean(axis=0)
        return _soft_threshold(w_bar, 1.0 / (n_blocks * rho))

    def b_apply(z: np.ndarray) -> np.ndarray:
        return -np.tile(z, n_blocks)

    def fhat_grad(r: np.ndarray, rho: float) -> np.ndarray:
        blocks = r.reshape(n_blocks, p)
        return (
            np.einsum("kij,kj->ki", gram, blocks) - atb
        ).ravel() / rho

    return ProxProblem(
        x_solver=x_solver,
        z_solver=z_solver,
        a_apply=lambda x: x,
        b_apply=b_apply,
        c=np.zeros(n_blocks * p),
        dim_x=n_blocks * p,
        dim_z=p,
        dim_r=n_blocks * p,
        fhat_grad=fhat_grad,
        a_is_identity=True,
    )


def dual_reference(inst: LassoInstance, z_ref: np.ndarray, rho: float) -> np.ndarray:
    """Fixed-point scaled dual variable implied by the primal solution.

    At a fixed point the x-update stationarity ties the dual to the loss
    gradient at the consensus point blockwise.
    """
    grads = (
        np.einsum("kij,kj->ki", np.stack([blk.T @ blk for blk in inst.a_blocks]),
                  np.tile(z_ref, (inst.n_blocks, 1)))
        - np.einsum("kij,ki->kj", inst.a_blocks, inst.b_blocks)
    ) / inst.mu
    return (-grads / rho).ravel()


def infer_epsilon(rho: float, m: float, big_l: float, kappa: float) -> float:
    """Exponent mapping an arbitrary step size onto the certified family."""
    if rho <= 0.0:
        raise DomainError("rho must be positive")
    if kappa <= 1.0:
        raise DomainError("epsilon inference needs kappa > 1")
    return math.log(rho / math.sqrt(m * big_l)) / math.log(kappa)


def _evaluate_point(
    problem: ProxProblem,
    cond: tuple[float, float, float],
    z_ref: np.ndarray,
    alpha: float,
    rho: float,
    target: float,
    budget: int,
) -> GridResult:
    m, big_l, kappa = cond
    certified: Optional[float] = None
    try:
        eps = infer_epsilon(rho, m, big_l, kappa)
        certified, _ = min_rate(ConditioningSpec(kappa, eps, alpha))
    except (UncertifiedError, DomainError):
        certified = None
    stop = StoppingRule(
        max_iters=budget, tol=None, reference_z=z_ref, ref_tol=target
    )
    _, trace = run(problem, rho, alpha, stop)
    dists = trace.dist_to_reference
    hit = np.nonzero(dists <= target)[0]
    iterations = int(hit[0]) if hit.size else None
    return GridResult(
        alpha=alpha,
        rho=rho,
        certified_tau=certified,
        iterations=iterations,
        final_error=float(dists[-1]),
    )


def run_grid(
    inst: LassoInstance,
    alphas: Sequence[float],
    rhos: Sequence[float],
    target: float,
    budget: int,
    workers: int = 1,
    z_ref: Optional[np.ndarray] = None,
) -> list[GridResult]:
    """Certified rate and iterations-to-target over a parameter grid.

    Results are keyed by ``(alpha, rho)`` and returned sorted, so the
    outcome does not depend on evaluation order. ``workers > 1``
    evaluates points concurrently.
    """
    if target <= 0.0:
        raise DomainError("target must be positive")
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    cond = conditioning(inst)
    if z_ref is None:
        z_ref = reference_solution(inst)
    problem = consensus_problem(inst)
    points = sorted((float(a), float(r)) for a in alphas for r in rhos)

    def job(point: tuple[float, float]) -> GridResult:
        return _evaluate_point(
            problem, cond, z_ref, point[0], point[1], target, budget
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, points))
    else:
        results = [job(pt) for pt in points]
    return results


def grid_csv(results: Sequence[GridResult]) -> str:
    """Grid results as CSV, rows sorted by ``(alpha, rho)``."""
    header = ["alpha", "rho", "certified_tau", "iterations", "final_error"]
    ordered = sorted(results, key=lambda g: (g.alpha, g.rho))
    rows = [
        [
            fmt_real(g.alpha),
            fmt_real(g.rho),
            fmt_real(g.certified_tau),
            str(g.iterations) if g.iterations is not None else "NA",
            fmt_real(g.final_error),
        ]
        for g in ordered
    ]
    return render_csv(header, rows)
