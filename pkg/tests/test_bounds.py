import numpy as np
import pytest

from admmcert.bounds import (
    bound_pair,
    lower_bound_rate,
    t_matrix_eig,
    upper_rate,
    worst_case_construction,
)
from admmcert.certify import ConditioningSpec
from admmcert.errors import DomainError


class TestUpperRate:
    def test_reference_point(self):
        tau, c = upper_rate(ConditioningSpec(100.0, 0.0, 1.0), kappa_B=1.0)
        assert tau == pytest.approx(0.95, abs=1e-15)
        assert c == pytest.approx(1.0, abs=1e-15)

    def test_epsilon_half(self):
        tau, _ = upper_rate(ConditioningSpec(100.0, 0.5, 1.5), kappa_B=1.0)
        assert tau == pytest.approx(1.0 - 1.5 / 200.0, abs=1e-15)

    def test_constant_scales_with_kappa_b(self):
        _, c = upper_rate(ConditioningSpec(50.0, 0.0, 1.0), kappa_B=3.5)
        assert c == pytest.approx(3.5, abs=1e-12)

    def test_alpha_domain(self):
        with pytest.raises(DomainError):
            upper_rate(ConditioningSpec(100.0, 0.0, 2.0), kappa_B=1.0)

    def test_strictly_increasing_in_abs_epsilon(self):
        for eps_lo, eps_hi in [(0.0, 0.25), (0.25, 0.5), (-0.1, -0.3)]:
            lo, _ = upper_rate(ConditioningSpec(500.0, eps_lo, 1.2), 1.0)
            hi, _ = upper_rate(ConditioningSpec(500.0, eps_hi, 1.2), 1.0)
            assert hi > lo


class TestLowerBoundRate:
    def test_reference_points(self):
        assert lower_bound_rate(ConditioningSpec(100.0, 0.0, 1.5)) == pytest.approx(
            1.0 - 3.0 / 11.0, abs=1e-12
        )
        assert lower_bound_rate(ConditioningSpec(1.0, 0.0, 1.0)) == pytest.approx(
            0.0, abs=1e-15
        )
        assert lower_bound_rate(ConditioningSpec(100.0, 0.5, 1.5)) == pytest.approx(
            1.0 - 3.0 / 101.0, abs=1e-12
        )


class TestTMatrixEig:
    def test_zero_ridge_form(self):
        lam, rho, alpha = 2.0, 3.0, 1.4
        assert t_matrix_eig(lam, 0.0, rho, alpha) == pytest.approx(
            1.0 - alpha * lam / (lam + rho), abs=1e-15
        )

    def test_reference_point(self):
        assert t_matrix_eig(1.0, 0.0, 10.0, 1.0) == pytest.approx(
            1.0 - 1.0 / 11.0, abs=1e-13
        )

    def test_alpha_zero_freezes(self):
        assert t_matrix_eig(5.0, 2.0, 1.0, 0.0) == 1.0

    def test_validation(self):
        with pytest.raises(DomainError):
            t_matrix_eig(0.0, 0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            t_matrix_eig(1.0, -1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            t_matrix_eig(1.0, 0.0, 0.0, 1.0)


class TestWorstCaseConstruction:
    def test_nonnegative_epsilon_choice(self):
        wc = worst_case_construction(ConditioningSpec(100.0, 0.0, 1.5), m=1.0, L=100.0)
        assert wc.delta == 0.0 and wc.q_eig == 1.0
        assert wc.achieved_rate == pytest.approx(1.0 - 1.5 / 11.0, abs=1e-12)

    def test_negative_epsilon_choice(self):
        wc = worst_case_construction(ConditioningSpec(100.0, -0.5, 1.0), m=1.0, L=100.0)
        assert wc.delta == 100.0 and wc.q_eig == 100.0
        assert wc.achieved_rate == pytest.approx(1.0 - 200.0 / 101.0**2, rel=1e-12)

    def test_requires_matching_kappa(self):
        with pytest.raises(DomainError):
            worst_case_construction(ConditioningSpec(50.0, 0.0, 1.0), m=1.0, L=100.0)

    def test_rate_consistent_with_eig_formula(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            kappa = float(10 ** rng.uniform(0.0, 5.0))
            eps = float(rng.uniform(-1.0, 1.0))
            alpha = float(rng.uniform(0.05, 1.95))
            m = float(10 ** rng.uniform(-2.0, 2.0))
            spec = ConditioningSpec(kappa, eps, alpha)
            wc = worst_case_construction(spec, m=m, L=m * kappa)
            rho = (m * m * kappa) ** 0.5 * spec.rho0
            direct = t_matrix_eig(wc.q_eig, wc.delta, rho, alpha)
            assert wc.achieved_rate == pytest.approx(direct, rel=1e-12)

    def test_achieved_rate_dominates_lower_bound(self):
        rng = np.random.default_rng(29)
        for _ in range(200):
            kappa = float(10 ** rng.uniform(0.0, 5.0))
            eps = float(rng.uniform(-1.0, 1.0))
            alpha = float(rng.uniform(0.05, 1.95))
            spec = ConditioningSpec(kappa, eps, alpha)
            wc = worst_case_construction(spec, m=1.0, L=kappa)
            assert wc.achieved_rate >= lower_bound_rate(spec) - 1e-12


class TestBoundPair:
    def test_collects_both_bounds(self):
        spec = ConditioningSpec(100.0, 0.0, 1.0)
        pair = bound_pair(spec, kappa_B=2.0)
        assert pair.tau_upper == pytest.approx(0.95, abs=1e-15)
        assert pair.C_upper == pytest.approx(2.0, abs=1e-12)
        assert pair.tau_lower == pytest.approx(1.0 - 2.0 / 11.0, abs=1e-12)
        assert 0.0 < pair.tau_lower <= pair.tau_upper < 1.0


class TestSandwich:
    def test_lower_below_upper_with_bounded_gap(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            kappa = float(10 ** rng.uniform(0.0, 5.0))
            eps = float(rng.uniform(-1.0, 1.0))
            alpha = float(rng.uniform(0.05, 1.95))
            spec = ConditioningSpec(kappa, eps, alpha)
            tau_up, _ = upper_rate(spec, kappa_B=1.0)
            tau_lo = lower_bound_rate(spec)
            assert tau_lo <= tau_up < 1.0
            gap_factor = (1.0 - tau_lo) / (1.0 - tau_up)
            assert gap_factor <= 4.0 + 1e-12
