"""Linear-convergence certification for over-relaxed ADMM.

A rate ``tau`` is certified by exhibiting a witness ``(P, lambda1,
lambda2)`` that makes a fixed 4x4 linear matrix inequality hold. The
inequality is assembled from the over-relaxation parameter ``alpha``
and the normalized conditioning ``(kappa, rho0)`` only, so a single
condition-number estimate certifies every problem instance in the
class. This module builds the inequality, searches for witnesses with a
small projected-subgradient oracle, bisects for the minimal certifiable
rate, and evaluates the closed-form witness that exists for
``alpha in (0, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DomainError, NoCertifiableAlphaError, UncertifiedError
from .linalg import SymMatrix, sym_eigs

P_MIN_EIG = 1e-6
LAMBDA_BOX = 1e6
FEAS_SCALE = 1e-9
TAU_TOL_DEFAULT = 1e-4
ALPHA_TOL_DEFAULT = 1e-3

_RESTARTS = 1
_MAX_STEPS = 700
_STALL_WINDOW = 30
_MAX_EMPTY_WINDOWS = 2
_LEVEL_FLOOR = 1e-15
_POLISH_CYCLES = 2
_POLISH_REL_GATE = 1e-2
_RESTART_SEED = 0xC347


@dataclass(frozen=True)
class ConditioningSpec:
    """Normalized problem conditioning that parameterizes certification.

    ``kappa`` is the product of the objective's condition number and the
    squared condition number of the constraint matrix; ``epsilon``
    selects the step size through ``rho0 = kappa**epsilon``; ``alpha``
    is the over-relaxation parameter.
    """

    kappa: float
    epsilon: float
    alpha: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa) and self.kappa >= 1.0):
            raise DomainError("kappa must be finite and >= 1")
        if not math.isfinite(self.epsilon):
            raise DomainError("epsilon must be finite")
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise DomainError("alpha must be finite and positive")

    @property
    def rho0(self) -> float:
        return self.kappa**self.epsilon


@dataclass
class LmiBlocks:
    """State-update and output matrices of the two-state recursion.

    ``build_blocks`` fills the six 2x2 blocks that depend only on
    ``alpha``; the quadratic-constraint weights ``M1``/``M2`` stay unset
    until :func:`build_iqc_weights` provides them.
    """

    A_hat: np.ndarray
    B_hat: np.ndarray
    C1_hat: np.ndarray
    D1_hat: np.ndarray
    C2_hat: np.ndarray
    D2_hat: np.ndarray
    M1: Optional[SymMatrix] = None
    M2: Optional[SymMatrix] = None


@dataclass(frozen=True)
class RateCertificate:
    """A checkable witness of linear convergence at rate ``tau``."""

    P: SymMatrix
    lambda1: float
    lambda2: float
    tau: float

    def is_well_formed(self) -> bool:
        """Type invariants: multipliers nonnegative, 0 < tau < 1, P PD."""
        if not (self.lambda1 >= 0.0 and self.lambda2 >= 0.0):
            return False
        if not 0.0 < self.tau < 1.0:
            return False
        return bool(sym_eigs(self.P)[0] > 0.0)


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of one witness search at a fixed rate.

    ``status == "certified"`` means the certificate passed the
    independent eigenvalue check; ``"not-found"`` records only that the
    search failed, not that no witness exists.
    """

    status: Literal["certified", "not-found"]
    certificate: Optional[RateCertificate]
    residual: float
    solver_iterations: int


def build_blocks(alpha: float) -> LmiBlocks:
    """The 2x2 recursion blocks for over-relaxation parameter ``alpha``."""
    if not math.isfinite(alpha):
        raise DomainError("alpha must be finite")
    return LmiBlocks(
        A_hat=np.array([[1.0, alpha - 1.0], [0.0, 0.0]]),
        B_hat=np.array([[alpha, -1.0], [0.0, -1.0]]),
        C1_hat=np.array([[-1.0, -1.0], [0.0, 0.0]]),
        D1_hat=np.array([[-1.0, 0.0], [1.0, 0.0]]),
        C2_hat=np.array([[1.0, alpha - 1.0], [0.0, 0.0]]),
        D2_hat=np.array([[alpha, -1.0], [0.0, 1.0]]),
    )


def build_iqc_weights(spec: ConditioningSpec) -> tuple[SymMatrix, SymMatrix]:
    """Quadratic-form weights for the two function classes.

    The first weight encodes the sector bound satisfied by gradients of
    the strongly convex, smooth term after normalization; with
    ``rho0 = kappa**epsilon`` it depends only on ``(kappa, epsilon)``.
    The second encodes monotonicity of the convex term's subgradient and
    is constant.
    """
    k, e = spec.kappa, spec.epsilon
    off = k ** (-0.5 - e) + k ** (0.5 - e)
    m1 = SymMatrix([[-2.0 * k ** (-2.0 * e), off], [off, -2.0]])
    m2 = SymMatrix([[0.0, 1.0], [1.0, 0.0]])
    return m1, m2


def lmi_blocks(spec: ConditioningSpec) -> LmiBlocks:
    """Fully populated blocks for ``spec`` (recursion plus weights)."""
    blocks = build_blocks(spec.alpha)
    blocks.M1, blocks.M2 = build_iqc_weights(spec)
    return blocks


def assemble_lmi(blocks: LmiBlocks, cert: RateCertificate) -> SymMatrix:
    """The 4x4 matrix whose negative semidefiniteness certifies ``cert.tau``.

    The first summand is the Lyapunov decrease condition for the
    two-state recursion; the second adds the multiplier-weighted
    quadratic constraints through the stacked output blocks.
    """
    if blocks.M1 is None or blocks.M2 is None:
        raise DomainError("blocks must carry M1 and M2; see build_iqc_weights")
    a, b = blocks.A_hat, blocks.B_hat
    p = cert.P.array
    tau2 = cert.tau**2
    top = np.block([[a.T @ p @ a - tau2 * p, a.T @ p @ b], [b.T @ p @ a, b.T @ p @ b]])
    cd = np.block([[blocks.C1_hat, blocks.D1_hat], [blocks.C2_hat, blocks.D2_hat]])
    z2 = np.zeros((2, 2))
    weights = np.block(
        [[cert.lambda1 * blocks.M1.array, z2], [z2, cert.lambda2 * blocks.M2.array]]
    )
    return SymMatrix(top + cd.T @ weights @ cd)


def _feasibility_margin(matrix: np.ndarray, margin: float) -> float:
    # Scale-aware slack: eigenvalues of a matrix this size are only
    # trustworthy to roughly machine precision times the entry scale.
    return margin + FEAS_SCALE * (1.0 + float(np.abs(matrix).max()))


def check_certificate(
    spec: ConditioningSpec, cert: RateCertificate, margin: float
) -> bool:
    """Verify a certificate against the assembled inequality.

    True iff the certificate is well formed and the largest eigenvalue
    of the assembled matrix is at most ``margin`` plus a scale-aware
    roundoff allowance.
    """
    if margin < 0.0:
        raise DomainError("margin must be nonnegative")
    if not cert.is_well_formed():
        return False
    assembled = assemble_lmi(lmi_blocks(spec), cert)
    lam_max = sym_eigs(assembled)[-1]
    return bool(lam_max <= _feasibility_margin(assembled.array, margin))


def analytic_certificate(spec: ConditioningSpec) -> RateCertificate:
    """The closed-form certificate available for ``alpha in (0, 2)``.

    Its rate is ``1 - alpha / (2 kappa^(1/2 + |eps|))``. Feasibility is
    guaranteed only for large enough ``kappa``; use
    :func:`check_certificate` to confirm at a given conditioning.
    """
    a = spec.alpha
    if not 0.0 < a < 2.0:
        raise DomainError("analytic certificate requires 0 < alpha < 2")
    p = SymMatrix([[1.0, a - 1.0], [a - 1.0, 1.0]])
    lam1 = a * spec.kappa ** (spec.epsilon - 0.5)
    tau = 1.0 - a / (2.0 * spec.kappa ** (0.5 + abs(spec.epsilon)))
    return RateCertificate(P=p, lambda1=lam1, lambda2=a, tau=tau)


class _LmiFamily:
    """Affine decomposition of the assembled matrix over solver variables.

    With ``trace(P) = 2`` fixed, ``P = [[1+a, b], [b, 1-a]]`` and the
    assembled matrix is ``T0 + a*Ta + b*Tb + m1*G1 + m2*G2`` where
    ``m1``/``m2`` are the multipliers rescaled so both G blocks have
    unit max-entry. The rescaling keeps subgradient components at
    comparable magnitudes across the whole ``kappa`` range.
    """

    def __init__(self, spec: ConditioningSpec, tau: float):
        blocks = lmi_blocks(spec)
        a_hat, b_hat = blocks.A_hat, blocks.B_hat
        tau2 = tau * tau

        def top(p: np.ndarray) -> np.ndarray:
            return np.block(
                [
                    [a_hat.T @ p @ a_hat - tau2 * p, a_hat.T @ p @ b_hat],
                    [b_hat.T @ p @ a_hat, b_hat.T @ p @ b_hat],
                ]
            )

        cd = np.block([[blocks.C1_hat, blocks.D1_hat], [blocks.C2_hat, blocks.D2_hat]])
        z2 = np.zeros((2, 2))
        g1 = cd.T @ np.block([[blocks.M1.array, z2], [z2, z2]]) @ cd
        g2 = cd.T @ np.block([[z2, z2], [z2, blocks.M2.array]]) @ cd
        self.t0 = top(np.eye(2))
        self.ta = top(np.array([[1.0, 0.0], [0.0, -1.0]]))
        self.tb = top(np.array([[0.0, 1.0], [1.0, 0.0]]))
        self.scale1 = float(np.abs(g1).max())
        self.scale2 = float(np.abs(g2).max())
        self.g1 = g1 / self.scale1
        self.g2 = g2 / self.scale2

    def matrix(self, v: np.ndarray) -> np.ndarray:
        s = self.t0 + v[0] * self.ta + v[1] * self.tb + v[2] * self.g1 + v[3] * self.g2
        return 0.5 * (s + s.T)

    def to_certificate(self, v: np.ndarray, tau: float) -> RateCertificate:
        p = SymMatrix([[1.0 + v[0], v[1]], [v[1], 1.0 - v[0]]])
        return RateCertificate(
            P=p, lambda1=v[2] / self.scale1, lambda2=v[3] / self.scale2, tau=tau
        )

    def from_certificate(self, cert: RateCertificate) -> np.ndarray:
        p = cert.P.array
        return np.array(
            [
                0.5 * (p[0, 0] - p[1, 1]),
                p[0, 1],
                cert.lambda1 * self.scale1,
                cert.lambda2 * self.scale2,
            ]
        )


def _project(v: np.ndarray, rmax: float) -> np.ndarray:
    a, b, m1, m2 = v
    r = math.hypot(a, b)
    if r > rmax:
        a *= rmax / r
        b *= rmax / r
    return np.array(
        [a, b, min(max(m1, 0.0), LAMBDA_BOX), min(max(m2, 0.0), LAMBDA_BOX)]
    )


def _descend(
    family: _LmiFamily, v0: np.ndarray, margin: float
) -> tuple[float, np.ndarray, int]:
    """Level-style projected subgradient descent from one start.

    Each step is a Polyak step toward a target one level gap below the
    incumbent. The gap halves only after a stretch of steps without
    improvement (with the iterate reset to the incumbent), which avoids
    collapsing the step size while real progress is still being made.
    """
    rmax = 1.0 - P_MIN_EIG
    v = _project(np.asarray(v0, dtype=float), rmax)
    f_best = np.inf
    v_best = v.copy()
    delta = None
    stall = 0
    empty_windows = 0
    improved_in_window = True
    evals = 0
    for _ in range(_MAX_STEPS):
        s = family.matrix(v)
        w, q = np.linalg.eigh(s)
        evals += 1
        f = float(w[-1])
        if math.isfinite(f) and f < f_best - 1e-14 * (1.0 + abs(f)):
            f_best, v_best, stall = f, v.copy(), 0
            improved_in_window = True
        else:
            stall += 1
        if not math.isfinite(f):
            v = v_best.copy()
            delta = 0.25 * (delta if delta is not None else 1.0)
            continue
        if f_best <= margin:
            break
        if delta is None:
            delta = 0.5 * max(abs(f), 1e-3)
        if stall >= _STALL_WINDOW:
            # A level window without any improvement means the current
            # gap is unreachable; two in a row means we have converged
            # as far as feasibility testing needs.
            empty_windows = 0 if improved_in_window else empty_windows + 1
            if empty_windows >= _MAX_EMPTY_WINDOWS:
                break
            improved_in_window = False
            delta *= 0.5
            stall = 0
            v = v_best.copy()
            if delta <= _LEVEL_FLOOR * (1.0 + abs(f_best)):
                break
        top = q[:, -1]
        grad = np.array(
            [
                top @ family.ta @ top,
                top @ family.tb @ top,
                top @ family.g1 @ top,
                top @ family.g2 @ top,
            ]
        )
        gnorm2 = float(grad @ grad)
        if gnorm2 < 1e-30:
            break
        step = (f - (f_best - delta)) / gnorm2
        step = min(step, 5.0 * (1.0 + float(np.linalg.norm(v))) / math.sqrt(gnorm2))
        v = _project(v - step * grad, rmax)
    return f_best, v_best, evals


def _coordinate_polish(
    family: _LmiFamily, v0: np.ndarray, f0: float, margin: float
) -> tuple[float, np.ndarray, int]:
    """Golden-section sweeps along each coordinate of the witness.

    The top eigenvalue is convex along every line, so a bracketed
    golden-section search per coordinate reliably trims the last bit of
    suboptimality the subgradient stage leaves behind.
    """
    rmax = 1.0 - P_MIN_EIG
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    v = v0.copy()
    f_best = f0
    evals = 0

    def value(vv: np.ndarray) -> float:
        return float(np.linalg.eigh(family.matrix(vv))[0][-1])

    for _ in range(_POLISH_CYCLES):
        if f_best <= margin:
            break
        for coord in range(4):
            span = 0.25 * (1.0 + abs(v[coord]))
            lo, hi = v[coord] - span, v[coord] + span
            x1 = hi - inv_phi * (hi - lo)
            x2 = lo + inv_phi * (hi - lo)

            def at(t: float) -> float:
                trial = v.copy()
                trial[coord] = t
                return value(_project(trial, rmax))

            f1, f2 = at(x1), at(x2)
            evals += 2
            for _ in range(24):
                if f1 <= f2:
                    hi, x2, f2 = x2, x1, f1
                    x1 = hi - inv_phi * (hi - lo)
                    f1 = at(x1)
                else:
                    lo, x1, f1 = x1, x2, f2
                    x2 = lo + inv_phi * (hi - lo)
                    f2 = at(x2)
                evals += 1
            t_new = x1 if f1 <= f2 else x2
            f_new = min(f1, f2)
            if f_new < f_best:
                v[coord] = t_new
                v = _project(v, rmax)
                f_best = f_new
    return f_best, v, evals


def _minimize_lmax(
    family: _LmiFamily, starts: list[np.ndarray], margin: float
) -> tuple[float, np.ndarray, int]:
    """Minimize the top eigenvalue over witnesses from several starts.

    Stops as soon as any start clears ``margin``, since feasibility
    needs no further decrease; otherwise polishes the best point with
    coordinate-wise line searches. Returns ``(best value, best point,
    eigensolves used)``.
    """
    best_f = np.inf
    best_v = _project(starts[0].copy(), 1.0 - P_MIN_EIG)
    evals = 0
    for v0 in starts:
        f_local, v_local, used = _descend(family, v0, margin)
        evals += used
        if f_local < best_f:
            best_f, best_v = f_local, v_local
        if best_f <= margin:
            return best_f, best_v, evals
    # Polishing pays off only near the feasibility boundary; far from it
    # the verdict cannot flip. Alternate line-search polish with warm
    # re-descents until neither makes progress.
    scale = 1.0 + float(np.abs(family.matrix(best_v)).max())
    if best_f <= _POLISH_REL_GATE * scale:
        for _ in range(3):
            f_prev = best_f
            best_f, best_v, used = _coordinate_polish(family, best_v, best_f, margin)
            evals += used
            if best_f <= margin:
                break
            f_local, v_local, used = _descend(family, best_v, margin)
            evals += used
            if f_local < best_f:
                best_f, best_v = f_local, v_local
            if best_f <= margin or best_f >= f_prev - 1e-13 * (1.0 + abs(f_prev)):
                break
    return best_f, best_v, evals


def _solver_starts(
    family: _LmiFamily, spec: ConditioningSpec, warm: Optional[RateCertificate]
) -> list[np.ndarray]:
    starts: list[np.ndarray] = []
    if warm is not None:
        starts.append(family.from_certificate(warm))
    if 0.0 < spec.alpha < 2.0:
        starts.append(family.from_certificate(analytic_certificate(spec)))
    rng = np.random.default_rng(_RESTART_SEED)
    # cold calls outside the closed-form range get extra random starts
    for _ in range(max(_RESTARTS, 3 - len(starts))):
        a, b = rng.uniform(-0.7, 0.7, size=2)
        starts.append(
            np.array([a, b, 10.0 ** rng.uniform(-2, 2), 10.0 ** rng.uniform(-2, 2)])
        )
    return starts


def find_certificate(
    spec: ConditioningSpec,
    tau: float,
    warm_start: Optional[RateCertificate] = None,
) -> FeasibilityReport:
    """Search for a witness certifying rate ``tau``.

    Minimizes the top eigenvalue of the assembled matrix over the
    witness variables with ``trace(P) = 2`` (the inequality is
    homogeneous in the witness, so the normalization loses nothing),
    ``P`` bounded away from singular and multipliers in ``[0, 1e6]``.
    A candidate is certified only after an independent eigenvalue check.
    ``"not-found"`` is one-sided: certificates are proofs, absences are
    not.
    """
    if not 0.0 < tau < 1.0:
        raise DomainError("tau must lie in (0, 1)")
    family = _LmiFamily(spec, tau)
    starts = _solver_starts(family, spec, warm_start)
    # The loop margin mirrors the acceptance margin so early exit and
    # final verification agree on what counts as feasible.
    probe = _feasibility_margin(family.matrix(starts[0]), 0.0)
    best_f, best_v, evals = _minimize_lmax(family, starts, probe)
    cert = family.to_certificate(best_v, tau)
    assembled = assemble_lmi(lmi_blocks(spec), cert)
    residual = float(sym_eigs(assembled)[-1])
    if (
        residual <= _feasibility_margin(assembled.array, 0.0)
        and cert.is_well_formed()
    ):
        return FeasibilityReport("certified", cert, residual, evals)
    return FeasibilityReport("not-found", None, residual, evals)


def min_rate(
    spec: ConditioningSpec, tol: float = TAU_TOL_DEFAULT
) -> tuple[float, RateCertificate]:
    """Smallest certifiable rate, located by bisection.

    Feasibility is monotone in ``tau`` (a witness for some rate stays a
    witness for any larger rate), so bisection applies. The analytic
    certificate seeds the upper endpoint when available; each certified
    midpoint warm-starts the next search. Raises
    :class:`UncertifiedError` when even ``tau = 1 - tol`` cannot be
    certified.
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    hi: Optional[float] = None
    cert: Optional[RateCertificate] = None
    report: Optional[FeasibilityReport] = None
    if 0.0 < spec.alpha < 2.0:
        guess = analytic_certificate(spec)
        if 0.0 < guess.tau < 1.0:
            report = find_certificate(spec, guess.tau)
            if report.status == "certified":
                hi, cert = guess.tau, report.certificate
    if hi is None:
        edge = 1.0 - tol
        report = find_certificate(spec, edge, warm_start=cert)
        if report.status == "certified":
            hi, cert = edge, report.certificate
        else:
            raise UncertifiedError(
                f"no certificate found even at tau = {edge}", report=report
            )
    # No rate below the worst-case floor can be certified, so the
    # bracket may start just under it instead of at zero.
    floor = 1.0 - 2.0 * spec.alpha / (1.0 + spec.kappa ** (0.5 + abs(spec.epsilon)))
    lo = max(0.0, min(floor - 0.05, hi))
    # Near tau = 1 an absolute tolerance is coarser than the whole
    # distance to 1, so also resolve the gap 1 - tau to five percent.
    while hi - lo > min(tol, 0.05 * (1.0 - hi) + 1e-12):
        mid = 0.5 * (lo + hi)
        report = find_certificate(spec, mid, warm_start=cert)
        if report.status == "certified":
            hi, cert = mid, report.certificate
        else:
            lo = mid
    assert cert is not None
    return hi, cert


def max_alpha(
    kappa: float,
    epsilon: float,
    alpha_hi: float = 10.0,
    tol: float = ALPHA_TOL_DEFAULT,
) -> float:
    """Largest over-relaxation for which any rate below 1 is certifiable.

    Bisects on ``alpha`` with the predicate "a certificate exists at a
    rate just below 1". Raises :class:`NoCertifiableAlphaError` when the
    predicate fails at every seed down to ``alpha = 0.1``.
    """
    if alpha_hi <= 0.0:
        raise DomainError("alpha_hi must be positive")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    tau_probe = 1.0 - 1e-6
    warm: Optional[RateCertificate] = None

    def certifiable(alpha: float) -> bool:
        nonlocal warm
        report = find_certificate(
            ConditioningSpec(kappa, epsilon, alpha), tau_probe, warm_start=warm
        )
        if report.status == "certified":
            warm = report.certificate
            return True
        return False

    seeds = [s for s in (1.0, 0.5, 0.25, 0.1) if s <= alpha_hi]
    if not seeds:
        seeds.append(alpha_hi)
    lo = None
    for seed in seeds:
        if certifiable(seed):
            lo = seed
            break
    if lo is None:
        raise NoCertifiableAlphaError(
            f"no alpha down to {seeds[-1]} is certifiable at "
            f"kappa={kappa}, eps={epsilon}"
        )
    if certifiable(alpha_hi):
        return alpha_hi
    hi = alpha_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if certifiable(mid):
            lo = mid
        else:
            hi = mid
    return lo


def iqc_form_residual(weight, a1, a2, b1, b2) -> float:
    """Quadratic form of a 2x2 weight applied blockwise to vector pairs.

    Evaluates ``[a1-a2; b1-b2]^T (W kron I_d) [a1-a2; b1-b2]``. Used by
    the test suite to confirm, by sampling, that gradient pairs of the
    two function classes satisfy their claimed sign conditions.
    """
    w = weight.array if isinstance(weight, SymMatrix) else np.asarray(weight, float)
    if w.shape != (2, 2):
        raise DomainError("weight must be 2x2")
    da = np.asarray(a1, float) - np.asarray(a2, float)
    db = np.asarray(b1, float) - np.asarray(b2, float)
    if da.shape != db.shape:
        raise DomainError("vector pairs must share one dimension")
    return float(
        w[0, 0] * (da @ da) + 2.0 * w[0, 1] * (da @ db) + w[1, 1] * (db @ db)
    )
