import numpy as np
import pytest

from admmcert.bounds import t_matrix_eig
from admmcert.certify import iqc_form_residual
from admmcert.engine import (
    AdmmState,
    ProxProblem,
    QuadraticInstance,
    StoppingRule,
    admm_step,
    empirical_rate,
    initial_state,
    quadratic_problem,
    quadratic_step,
    regularize,
    run,
    trace_csv,
    validate_dynamics,
)
from admmcert.errors import (
    DivergenceError,
    DomainError,
    EstimationError,
    SubproblemError,
    UnsupportedProblemError,
)
from admmcert.linalg import SymMatrix


def random_instance(seed, d=4, delta=0.7, rho=2.3, alpha=1.6):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d))
    q = g.T @ g + 0.5 * np.eye(d)
    inst = QuadraticInstance(Q=SymMatrix(q), delta=delta, rho=rho, alpha=alpha)
    return inst, rng


class TestQuadraticStep:
    def test_origin_is_fixed(self):
        inst, _ = random_instance(0)
        x, z, u = quadratic_step(inst, np.zeros(4), np.zeros(4))
        assert np.all(x == 0.0) and np.all(z == 0.0) and np.all(u == 0.0)

    def test_dual_tracks_ridge(self):
        # from any (z, u = delta z / rho) the ratio is preserved
        inst, rng = random_instance(1)
        z = rng.standard_normal(4)
        _, z1, u1 = quadratic_step(inst, z, (inst.delta / inst.rho) * z)
        assert np.abs(u1 - (inst.delta / inst.rho) * z1).max() <= 1e-12

    def test_iteration_matrix_eigenvalues(self):
        inst = QuadraticInstance(
            Q=SymMatrix(np.diag([1.0, 100.0])), delta=0.0, rho=10.0, alpha=1.0
        )
        cols = []
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1.0
            _, z1, _ = quadratic_step(inst, e, np.zeros(2))
            cols.append(z1)
        t = np.column_stack(cols)
        eigs = np.sort(np.linalg.eigvals(t).real)
        assert eigs == pytest.approx([1.0 / 11.0, 10.0 / 11.0], abs=1e-12)
        for lam, eig in [(100.0, eigs[0]), (1.0, eigs[1])]:
            assert t_matrix_eig(lam, 0.0, 10.0, 1.0) == pytest.approx(eig, abs=1e-12)

    def test_matches_generic_step(self):
        inst, rng = random_instance(2)
        problem = quadratic_problem(inst)
        for _ in range(10):
            z, u = rng.standard_normal((2, 4))
            x1, z1, u1 = quadratic_step(inst, z, u)
            state = admm_step(
                problem, AdmmState(np.zeros(4), z, u, 0), inst.rho, inst.alpha
            )
            assert np.abs(state.x - x1).max() <= 1e-10
            assert np.abs(state.z - z1).max() <= 1e-10
            assert np.abs(state.u - u1).max() <= 1e-10

    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            QuadraticInstance(SymMatrix(np.eye(2)), delta=-1.0, rho=1.0, alpha=1.0)
        with pytest.raises(DomainError):
            QuadraticInstance(SymMatrix(np.eye(2)), delta=0.0, rho=0.0, alpha=1.0)
        with pytest.raises(DomainError):
            QuadraticInstance(
                SymMatrix(np.diag([1.0, -0.5])), delta=0.0, rho=1.0, alpha=1.0
            )


def shifted_pair_problem(x_bar, z_bar):
    """f = ||x - x_bar||^2 / 2, g = ||z - z_bar||^2 / 2, x - z = 0.

    Closed-form fixed point: x* = z* = (x_bar + z_bar) / 2 and
    u* = (x_bar - x*) / rho, which lets step invariance be tested away
    from the origin.
    """
    d = len(x_bar)

    def x_solver(v, rho):
        return (x_bar - rho * v) / (1.0 + rho)

    def z_solver(w, rho):
        return (z_bar + rho * w) / (1.0 + rho)

    return ProxProblem(
        x_solver=x_solver,
        z_solver=z_solver,
        a_apply=lambda x: x,
        b_apply=lambda z: -z,
        c=np.zeros(d),
        dim_x=d,
        dim_z=d,
        dim_r=d,
        fhat_grad=lambda r, rho: (r - x_bar) / rho,
        a_is_identity=True,
    )


class TestAdmmStep:
    def test_alpha_one_is_plain_admm(self):
        inst, rng = random_instance(3, alpha=1.0)
        problem = quadratic_problem(inst)
        z, u = rng.standard_normal((2, 4))
        state = admm_step(problem, AdmmState(np.zeros(4), z, u, 0), inst.rho, 1.0)
        # plain three-line update written out directly
        q, rho, delta = inst.Q.array, inst.rho, inst.delta
        x_ref = np.linalg.solve(q + rho * np.eye(4), -rho * (-z + u))
        z_ref = rho * (x_ref + u) / (delta + rho)
        u_ref = u + x_ref - z_ref
        assert np.abs(state.x - x_ref).max() <= 1e-12
        assert np.abs(state.z - z_ref).max() <= 1e-12
        assert np.abs(state.u - u_ref).max() <= 1e-12

    def test_fixed_point_preserved_at_origin(self):
        inst, _ = random_instance(4)
        problem = quadratic_problem(inst)
        state = admm_step(
            problem, AdmmState(np.zeros(4), np.zeros(4), np.zeros(4), 0), inst.rho, 1.7
        )
        for arr in (state.x, state.z, state.u):
            assert np.abs(arr).max() <= 1e-12

    def test_fixed_point_preserved_off_origin(self):
        rng = np.random.default_rng(5)
        x_bar, z_bar = rng.standard_normal((2, 3))
        problem = shifted_pair_problem(x_bar, z_bar)
        rho = 1.8
        x_star = 0.5 * (x_bar + z_bar)
        u_star = (x_bar - x_star) / rho
        for alpha in (0.8, 1.0, 1.6):
            state = admm_step(
                problem, AdmmState(x_star, x_star, u_star, 0), rho, alpha
            )
            assert np.abs(state.x - x_star).max() <= 1e-12
            assert np.abs(state.z - x_star).max() <= 1e-12
            assert np.abs(state.u - u_star).max() <= 1e-12

    def test_solver_failure_carries_iteration(self):
        def broken(v, rho):
            raise RuntimeError("boom")

        problem = ProxProblem(
            x_solver=broken,
            z_solver=lambda w, rho: w,
            a_apply=lambda x: x,
            b_apply=lambda z: -z,
            c=np.zeros(2),
            dim_x=2,
            dim_z=2,
            dim_r=2,
        )
        with pytest.raises(SubproblemError) as info:
            admm_step(problem, AdmmState(np.zeros(2), np.zeros(2), np.zeros(2), 3), 1.0, 1.0)
        assert info.value.iteration == 3

    def test_builtin_solver_stationarity(self):
        inst, rng = random_instance(6)
        problem = quadratic_problem(inst)
        q = inst.Q.array
        for rho in (0.3, 1.0, 7.5):
            v = rng.standard_normal(4)
            x = problem.x_solver(v, rho)
            grad = q @ x + rho * (x + v)
            assert np.linalg.norm(grad) <= 1e-8 * rho * (1.0 + np.linalg.norm(v))


class TestRun:
    def test_infinite_tol_returns_initial_state(self):
        inst, _ = random_instance(7)
        problem = quadratic_problem(inst)
        state, trace = run(
            problem, inst.rho, inst.alpha, StoppingRule(max_iters=50, tol=np.inf)
        )
        assert state.k == 0
        assert trace.iterations == 0

    def test_converges_to_solution(self):
        inst, rng = random_instance(8, alpha=1.0)
        problem = quadratic_problem(inst)
        z0, u0 = rng.standard_normal((2, 4))
        state, trace = run(
            problem,
            inst.rho,
            inst.alpha,
            StoppingRule(max_iters=10_000, tol=1e-11),
            initial=AdmmState(np.zeros(4), z0, u0, 0),
        )
        assert state.k < 10_000
        assert trace.primal_resid[-1] <= 1e-11
        assert np.abs(state.z).max() <= 1e-9

    def test_divergence_detected(self):
        inst = QuadraticInstance(
            Q=SymMatrix(np.diag([1.0, 100.0])), delta=0.0, rho=10.0, alpha=5.0
        )
        problem = quadratic_problem(inst)
        with pytest.raises(DivergenceError) as info:
            run(
                problem,
                inst.rho,
                inst.alpha,
                StoppingRule(max_iters=10_000, tol=1e-12),
                initial=AdmmState(np.zeros(2), np.array([0.0, 1.0]), np.zeros(2), 0),
            )
        assert info.value.iteration is not None

    def test_reference_stopping(self):
        inst, _ = random_instance(9, alpha=1.0)
        problem = quadratic_problem(inst)
        stop = StoppingRule(
            max_iters=10_000, tol=None, reference_z=np.zeros(4), ref_tol=1e-6
        )
        state, trace = run(
            problem,
            inst.rho,
            inst.alpha,
            stop,
            initial=AdmmState(np.zeros(4), np.ones(4), np.zeros(4), 0),
        )
        assert trace.dist_to_reference[-1] <= 1e-6
        assert trace.dist_to_reference[-2] > 1e-6

    def test_stopping_rule_validation(self):
        with pytest.raises(DomainError):
            StoppingRule(max_iters=-1)
        with pytest.raises(DomainError):
            StoppingRule(reference_z=np.zeros(2), ref_tol=None)


def eigenvector_run(kappa=100.0, rho=10.0, alpha=1.0, iters=400):
    inst = QuadraticInstance(
        Q=SymMatrix(np.diag([1.0, kappa])), delta=0.0, rho=rho, alpha=alpha
    )
    problem = quadratic_problem(inst)
    z0 = np.array([1.0, 0.0])
    state0 = AdmmState(np.zeros(2), z0, np.zeros(2), 0)
    stop = StoppingRule(max_iters=iters, tol=None)
    return run(problem, rho, alpha, stop, initial=state0)


class TestEmpiricalRate:
    def test_eigenvector_initialization_rate(self):
        _, trace = eigenvector_run()
        rate = empirical_rate(trace, np.zeros(4))
        assert rate == pytest.approx(1.0 - 1.0 / 11.0, abs=1e-3)

    def test_zero_initial_error(self):
        inst, _ = random_instance(10)
        problem = quadratic_problem(inst)
        _, trace = run(problem, inst.rho, inst.alpha, StoppingRule(max_iters=30, tol=None))
        with pytest.raises(EstimationError):
            empirical_rate(trace, np.zeros(8))

    def test_insufficient_decrease(self):
        _, trace = eigenvector_run(iters=25)
        with pytest.raises(EstimationError):
            empirical_rate(trace, np.zeros(4))

    def test_reference_length_checked(self):
        _, trace = eigenvector_run()
        with pytest.raises(DomainError):
            empirical_rate(trace, np.zeros(3))


class TestValidateDynamics:
    def test_quadratic_run_satisfies_recursion(self):
        inst, rng = random_instance(11)
        problem = quadratic_problem(inst)
        z0, u0 = rng.standard_normal((2, 4))
        _, trace = run(
            problem,
            inst.rho,
            inst.alpha,
            StoppingRule(max_iters=200, tol=None),
            initial=AdmmState(np.zeros(4), z0, u0, 0),
        )
        state_scale = 1.0 + max(
            np.abs(trace.s).max(), np.abs(trace.u).max(), np.abs(trace.r).max()
        )
        assert validate_dynamics(trace, inst.alpha) <= 1e-8 * state_scale

    def test_single_step_from_origin(self):
        inst, _ = random_instance(12)
        problem = quadratic_problem(inst)
        _, trace = run(problem, inst.rho, inst.alpha, StoppingRule(max_iters=1, tol=None))
        assert validate_dynamics(trace, inst.alpha) <= 1e-15

    def test_alpha_one_form(self):
        inst, rng = random_instance(13, alpha=1.0)
        problem = quadratic_problem(inst)
        z0 = rng.standard_normal(4)
        _, trace = run(
            problem,
            1.9,
            1.0,
            StoppingRule(max_iters=100, tol=None),
            initial=AdmmState(np.zeros(4), z0, np.zeros(4), 0),
        )
        assert validate_dynamics(trace, 1.0) <= 1e-10

    def test_requires_gradient_metadata(self):
        problem = ProxProblem(
            x_solver=lambda v, rho: -v,
            z_solver=lambda w, rho: w,
            a_apply=lambda x: x,
            b_apply=lambda z: -z,
            c=np.zeros(2),
            dim_x=2,
            dim_z=2,
            dim_r=2,
        )
        _, trace = run(problem, 1.0, 1.0, StoppingRule(max_iters=5, tol=None))
        with pytest.raises(UnsupportedProblemError):
            validate_dynamics(trace, 1.0)


class TestRegularize:
    def test_zero_delta_identity(self):
        inst, _ = random_instance(14)
        problem = quadratic_problem(inst)
        assert regularize(problem, 0.0) is problem

    def test_matches_shifted_hessian(self):
        inst, rng = random_instance(15)
        problem = quadratic_problem(inst)
        delta = 0.9
        shifted = quadratic_problem(
            QuadraticInstance(
                Q=SymMatrix(inst.Q.array + delta * np.eye(4)),
                delta=inst.delta,
                rho=inst.rho,
                alpha=inst.alpha,
            )
        )
        reg = regularize(problem, delta)
        for rho in (0.5, 2.0):
            v = rng.standard_normal(4)
            assert np.abs(reg.x_solver(v, rho) - shifted.x_solver(v, rho)).max() <= 1e-10
            r = rng.standard_normal(4)
            assert np.abs(reg.fhat_grad(r, rho) - shifted.fhat_grad(r, rho)).max() <= 1e-10

    def test_regularized_stationarity(self):
        inst, rng = random_instance(16)
        problem = quadratic_problem(inst)
        delta = 1.3
        reg = regularize(problem, delta)
        q = inst.Q.array
        for rho in (0.5, 3.0):
            v = rng.standard_normal(4)
            x = reg.x_solver(v, rho)
            grad = q @ x + delta * x + rho * (x + v)
            assert np.linalg.norm(grad) <= 1e-8 * rho * (1.0 + np.linalg.norm(v))

    def test_certified_rate_improves_with_regularization(self):
        # conditioning shift (L + delta) / (m + delta) feeds the certifier
        from admmcert.certify import ConditioningSpec, min_rate

        m, big_l, delta = 1.0, 100.0, 4.0
        kappa_new = (big_l + delta) / (m + delta)
        tau_before, _ = min_rate(ConditioningSpec(big_l / m, 0.0, 1.5))
        tau_after, _ = min_rate(ConditioningSpec(kappa_new, 0.0, 1.5))
        assert tau_after < tau_before

    def test_requires_identity_constraint(self):
        problem = ProxProblem(
            x_solver=lambda v, rho: -v,
            z_solver=lambda w, rho: w,
            a_apply=lambda x: 2.0 * x,
            b_apply=lambda z: -z,
            c=np.zeros(2),
            dim_x=2,
            dim_z=2,
            dim_r=2,
            a_is_identity=False,
        )
        with pytest.raises(UnsupportedProblemError):
            regularize(problem, 0.5)

    def test_negative_delta_rejected(self):
        inst, _ = random_instance(17)
        with pytest.raises(DomainError):
            regularize(quadratic_problem(inst), -0.1)


class TestSectorSampling:
    def test_gradient_pairs_satisfy_sector_form(self):
        # random quadratics with curvature inside [m, L]
        rng = np.random.default_rng(19)
        m_lo, l_hi = 0.2, 5.0
        weight = [[-2.0 * m_lo * l_hi, m_lo + l_hi], [m_lo + l_hi, -2.0]]
        for _ in range(200):
            d = int(rng.integers(1, 5))
            eigs = rng.uniform(m_lo, l_hi, size=d)
            basis = np.linalg.qr(rng.standard_normal((d, d)))[0]
            hess = basis @ np.diag(eigs) @ basis.T
            a1, a2 = rng.standard_normal((2, d))
            assert iqc_form_residual(weight, a1, a2, hess @ a1, hess @ a2) >= -1e-9


class TestTraceCsv:
    def test_schema_without_reference(self):
        inst, _ = random_instance(20)
        problem = quadratic_problem(inst)
        _, trace = run(problem, inst.rho, inst.alpha, StoppingRule(max_iters=3, tol=None))
        lines = trace_csv(trace).strip().split("\n")
        assert lines[0] == "k,primal_residual,dual_residual"
        assert len(lines) == 5
        assert lines[1].split(",")[2] == "NA"

    def test_schema_with_reference(self):
        inst, rng = random_instance(21)
        problem = quadratic_problem(inst)
        z0 = rng.standard_normal(4)
        stop = StoppingRule(max_iters=4, tol=None, reference_z=np.zeros(4), ref_tol=0.0)
        _, trace = run(
            problem, inst.rho, inst.alpha, stop,
            initial=AdmmState(np.zeros(4), z0, np.zeros(4), 0),
        )
        lines = trace_csv(trace).strip().split("\n")
        assert lines[0] == "k,primal_residual,dual_residual,dist_to_reference"
        # 17 significant digits survive a round trip
        value = float(lines[2].split(",")[3])
        assert value == trace.dist_to_reference[1]

    def test_deterministic_bytes(self):
        inst, _ = random_instance(22)
        problem = quadratic_problem(inst)
        _, t1 = run(problem, inst.rho, inst.alpha, StoppingRule(max_iters=5, tol=None))
        _, t2 = run(problem, inst.rho, inst.alpha, StoppingRule(max_iters=5, tol=None))
        assert trace_csv(t1) == trace_csv(t2)


class TestInitialState:
    def test_zeros(self):
        inst, _ = random_instance(23)
        state = initial_state(quadratic_problem(inst))
        assert state.k == 0
        assert np.all(state.x == 0.0) and np.all(state.z == 0.0) and np.all(state.u == 0.0)
