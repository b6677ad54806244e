"""Closed-form rate bounds and the quadratic worst-case construction.

The upper bound comes with an explicit constant; the lower bound is the
exact convergence rate of a diagonal quadratic instance, so every value
returned here is attainable by running the algorithm itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .certify import ConditioningSpec
from .errors import DomainError


@dataclass(frozen=True)
class BoundPair:
    """Upper rate with its constant, and the matching lower rate."""

    tau_upper: float
    C_upper: float
    tau_lower: float


class WorstCase(NamedTuple):
    delta: float
    q_eig: float
    achieved_rate: float


def upper_rate(spec: ConditioningSpec, kappa_B: float) -> tuple[float, float]:
    """Closed-form certified rate and constant for alpha in (0, 2).

    Returns ``(tau, C)`` with ``tau = 1 - alpha / (2 kappa^(1/2 + |eps|))``
    and ``C = kappa_B * sqrt(max(alpha/(2-alpha), (2-alpha)/alpha))``.
    """
    if not 0.0 < spec.alpha < 2.0:
        raise DomainError("upper_rate requires 0 < alpha < 2")
    if kappa_B < 1.0:
        raise DomainError("kappa_B must be at least 1")
    tau = 1.0 - spec.alpha / (2.0 * spec.kappa ** (0.5 + abs(spec.epsilon)))
    ratio = max(spec.alpha / (2.0 - spec.alpha), (2.0 - spec.alpha) / spec.alpha)
    return tau, kappa_B * ratio**0.5


def lower_bound_rate(spec: ConditioningSpec) -> float:
    """Worst-case rate floor ``1 - 2 alpha / (1 + kappa^(1/2 + |eps|))``."""
    return 1.0 - 2.0 * spec.alpha / (1.0 + spec.kappa ** (0.5 + abs(spec.epsilon)))


def bound_pair(spec: ConditioningSpec, kappa_B: float) -> BoundPair:
    """Both closed-form bounds for one conditioning, as a pair."""
    tau_upper, c_upper = upper_rate(spec, kappa_B)
    return BoundPair(tau_upper=tau_upper, C_upper=c_upper, tau_lower=lower_bound_rate(spec))


def t_matrix_eig(lam: float, delta: float, rho: float, alpha: float) -> float:
    """Eigenvalue of the quadratic-instance iteration matrix.

    ``lam`` is an eigenvalue of the quadratic's Hessian, ``delta`` the
    curvature of the ridge term, ``rho`` the step size.
    """
    if lam <= 0.0:
        raise DomainError("lam must be positive")
    if delta < 0.0:
        raise DomainError("delta must be nonnegative")
    if rho <= 0.0:
        raise DomainError("rho must be positive")
    return 1.0 - alpha * rho * (lam + delta) / ((rho + delta) * (lam + rho))


def worst_case_construction(spec: ConditioningSpec, m: float, L: float) -> WorstCase:
    """Slow quadratic instance matching the lower bound.

    Picks the ridge curvature and Hessian eigenvalue that make the
    iteration matrix slowest at step size ``sqrt(mL) * kappa^eps``: no
    ridge and the smallest eigenvalue when ``eps >= 0``, a ridge of
    curvature ``L`` and the largest eigenvalue otherwise. The achieved
    rate is exact for that instance and never falls below
    :func:`lower_bound_rate`.
    """
    if not 0.0 < m <= L:
        raise DomainError("need 0 < m <= L")
    if abs(L / m - spec.kappa) > 1e-9 * spec.kappa:
        raise DomainError("L/m must equal spec.kappa (identity constraint matrix)")
    rho = (m * L) ** 0.5 * spec.rho0
    if spec.epsilon >= 0.0:
        delta, q_eig = 0.0, m
    else:
        delta, q_eig = L, L
    rate = t_matrix_eig(q_eig, delta, rho, spec.alpha)
    return WorstCase(delta=delta, q_eig=q_eig, achieved_rate=rate)
