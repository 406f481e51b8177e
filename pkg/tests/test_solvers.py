"""Solver contracts: proximal steps, ADMM vs a generic convex oracle, the
constrained model, and backend interchangeability."""

import numpy as np
import pytest

from mhotv import (LinearOperator, RegularizerSpec, SolverOptions, admm_l1, build_stencil,
                   cgls, circulant_matrix, constrained_l1, gaussian_sensing,
                   identity_operator, level_weights, project_nonneg, random_sensing,
                   shrink, ti_wavelet_transform, transform_fourier)
from mhotv.errors import DimensionMismatch, InvalidOrder, UnsupportedOrder

cvxpy = pytest.importorskip("cvxpy")


def cvx_unconstrained(A, b, lam, weights, stencil_mats):
    x = cvxpy.Variable(A.shape[1])
    reg = sum(w * cvxpy.norm1(T @ x) for w, T in zip(weights, stencil_mats))
    problem = cvxpy.Problem(cvxpy.Minimize(cvxpy.sum_squares(A @ x - b) + lam * reg))
    problem.solve(solver=cvxpy.CLARABEL)
    return np.asarray(x.value), problem.value


def cvx_constrained(A, b, weights, stencil_mats):
    x = cvxpy.Variable(A.shape[1])
    reg = sum(w * cvxpy.norm1(T @ x) for w, T in zip(weights, stencil_mats))
    problem = cvxpy.Problem(cvxpy.Minimize(reg), [A @ x == b])
    problem.solve(solver=cvxpy.CLARABEL)
    return np.asarray(x.value), problem.value


class TestShrink:
    def test_zero_threshold_identity(self):
        v = np.random.default_rng(0).standard_normal(9)
        assert np.array_equal(shrink(v, 0.0), v)

    def test_direct_formula(self):
        assert np.allclose(shrink(np.array([3.0, -1.0, 0.5]), 1.0), [2.0, 0.0, 0.0])

    def test_minimizes_scalar_prox(self):
        # tau*|x| + 0.5*(x - v)^2 against a dense grid, for several (v, tau)
        grid = np.linspace(-6, 6, 120001)
        for v in (-2.7, -0.4, 0.0, 0.9, 3.3):
            for tau in (0.0, 0.3, 1.2):
                objective = tau * np.abs(grid) + 0.5 * (grid - v) ** 2
                assert abs(shrink(np.array([v]), tau)[0] - grid[np.argmin(objective)]) < 1e-4

    def test_negative_threshold(self):
        with pytest.raises(InvalidOrder):
            shrink(np.zeros(3), -0.1)


class TestProjectNonneg:
    def test_all_negative(self):
        assert np.array_equal(project_nonneg(np.array([-1.0, -2.0])), [0.0, 0.0])

    def test_nonnegative_unchanged(self):
        v = np.array([0.0, 1.5, 2.0])
        assert np.array_equal(project_nonneg(v), v)

    def test_idempotent(self):
        v = np.random.default_rng(1).standard_normal(20)
        assert np.array_equal(project_nonneg(project_nonneg(v)), project_nonneg(v))


class TestRegularizerSpec:
    def test_wavelet_requires_small_integer_order(self):
        with pytest.raises(UnsupportedOrder):
            RegularizerSpec(backend="wavelet", order=2.5, levels=1, lam=1.0)

    def test_decomp_requires_integer(self):
        with pytest.raises(InvalidOrder):
            RegularizerSpec(backend="mhotv", order=1.5, levels=1, lam=1.0, path="decomp")

    def test_negative_lambda(self):
        with pytest.raises(InvalidOrder):
            RegularizerSpec(order=1, levels=1, lam=-1.0)


class TestAdmmL1:
    def test_lambda_zero_identity_returns_data(self):
        b = np.random.default_rng(2).standard_normal(16)
        f, report = admm_l1(identity_operator(16), b, RegularizerSpec(order=1, levels=1, lam=0.0))
        assert np.abs(f - b).max() < 1e-10

    def test_lambda_zero_matches_cgls(self):
        rng = np.random.default_rng(3)
        op = LinearOperator.from_matrix(rng.standard_normal((24, 16)))
        b = rng.standard_normal(24)
        f, _ = admm_l1(op, b, RegularizerSpec(order=2, levels=2, lam=0.0))
        ref, _ = cgls(op, b, max_iter=500, tol=1e-13)
        assert np.linalg.norm(f - ref) < 1e-6 * np.linalg.norm(ref)

    def test_matches_convex_oracle(self):
        rng = np.random.default_rng(4)
        truth = np.r_[np.zeros(8), np.ones(8)]
        b = truth + 0.2 * rng.standard_normal(16)
        lam = 0.5
        reg = RegularizerSpec(order=1, levels=1, lam=lam)
        opts = SolverOptions(max_outer=3000, primal_tol=1e-12, dual_tol=1e-10)
        f, report = admm_l1(identity_operator(16), b, reg, opts)
        T = circulant_matrix(build_stencil(1, 1, 16))
        w = level_weights(1, 0)
        _, optimum = cvx_unconstrained(np.eye(16), b, lam, w, [T])
        ours = np.sum((f - b) ** 2) + lam * w[0] * np.abs(T @ f).sum()
        assert ours - optimum < 1e-6

    def test_multilevel_matches_convex_oracle(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((12, 16))
        b = rng.standard_normal(12)
        lam = 0.8
        reg = RegularizerSpec(order=2, levels=2, lam=lam)
        opts = SolverOptions(max_outer=4000, primal_tol=1e-12, dual_tol=1e-10)
        f, _ = admm_l1(LinearOperator.from_matrix(A, precompute_normal=True), b, reg, opts)
        mats = [circulant_matrix(build_stencil(2, 2 ** j, 16)) for j in range(2)]
        w = level_weights(2, 1)
        _, optimum = cvx_unconstrained(A, b, lam, w, mats)
        ours = np.sum((A @ f - b) ** 2) + lam * sum(
            wj * np.abs(T @ f).sum() for wj, T in zip(w, mats))
        assert ours - optimum < 1e-6

    def test_nonneg_flag(self):
        rng = np.random.default_rng(6)
        op = LinearOperator.from_matrix(rng.standard_normal((20, 12)))
        b = rng.standard_normal(20)
        reg = RegularizerSpec(order=1, levels=1, lam=0.1)
        f, _ = admm_l1(op, b, reg, SolverOptions(max_outer=100, nonneg=True))
        assert f.min() >= 0.0

    def test_path_interchangeable(self):
        rng = np.random.default_rng(7)
        op = random_sensing(32, 64, 0.2, seed=11)
        b = op.apply(rng.standard_normal(64))
        opts = SolverOptions(max_outer=2000, primal_tol=1e-10, dual_tol=1e-8)
        outs = {}
        for path in ("fourier", "decomp"):
            reg = RegularizerSpec(order=2, levels=2, lam=0.3, path=path)
            outs[path], _ = admm_l1(op, b, reg, opts)
        rel = np.linalg.norm(outs["fourier"] - outs["decomp"]) / np.linalg.norm(outs["decomp"])
        assert rel < 1e-6

    def test_wavelet_backend_runs(self):
        rng = np.random.default_rng(8)
        op = random_sensing(32, 64, 0.2, seed=12)
        b = op.apply(rng.standard_normal(64))
        reg = RegularizerSpec(backend="wavelet", order=2, levels=2, lam=0.3)
        f, report = admm_l1(op, b, reg, SolverOptions(max_outer=200))
        assert np.all(np.isfinite(f))
        assert len(report.objective) == report.iterations

    def test_dimension_mismatch(self):
        op = identity_operator(8)
        with pytest.raises(DimensionMismatch):
            admm_l1(op, np.zeros(9), RegularizerSpec(order=1, levels=1, lam=0.1))

    def test_primal_residual_below_tol_at_convergence(self):
        rng = np.random.default_rng(9)
        b = rng.standard_normal(32)
        reg = RegularizerSpec(order=1, levels=2, lam=0.4)
        opts = SolverOptions(max_outer=5000, primal_tol=1e-8, dual_tol=1e-6)
        _, report = admm_l1(identity_operator(32), b, reg, opts)
        assert report.converged
        assert report.primal_residual[-1] < 1e-8
        assert len(report.primal_residual) == report.iterations

    def test_haar_equivalence_small(self):
        # identical models => identical minimizers (order-1 multiscale vs Haar frame)
        rng = np.random.default_rng(10)
        op = random_sensing(48, 96, 0.15, seed=13)
        truth = np.repeat(rng.standard_normal(8), 12)
        b = op.apply(truth) + 0.05 * rng.standard_normal(48)
        opts = SolverOptions(max_outer=4000, primal_tol=1e-11, dual_tol=1e-9)
        f_diff, _ = admm_l1(op, b, RegularizerSpec(order=1, levels=3, lam=0.5), opts)
        f_haar, _ = admm_l1(op, b, RegularizerSpec(backend="wavelet", order=1, levels=3, lam=0.5), opts)
        assert np.linalg.norm(f_diff - f_haar) / np.linalg.norm(f_haar) < 1e-3


class TestConstrainedL1:
    def test_zero_data_zero_solution(self):
        op = LinearOperator.from_matrix(np.random.default_rng(11).standard_normal((8, 16)))
        f, report = constrained_l1(op, np.zeros(8), RegularizerSpec(order=1, levels=1, lam=1.0))
        assert np.abs(f).max() == 0.0
        assert report.converged

    def test_matches_convex_oracle(self):
        rng = np.random.default_rng(12)
        A = rng.standard_normal((8, 16))
        truth = np.r_[np.zeros(10), np.ones(6)]
        b = A @ truth
        reg = RegularizerSpec(order=1, levels=1, lam=1.0)
        opts = SolverOptions(max_outer=4000, al_outer=40)
        f, report = constrained_l1(LinearOperator.from_matrix(A, precompute_normal=True), b, reg, opts)
        T = circulant_matrix(build_stencil(1, 1, 16))
        w = level_weights(1, 0)
        _, optimum = cvx_constrained(A, b, w, [T])
        ours = w[0] * np.abs(T @ f).sum()
        assert abs(ours - optimum) < 1e-4
        assert report.rel_data_error < 1e-6

    def test_feasibility_monotone(self):
        rng = np.random.default_rng(13)
        A = rng.standard_normal((20, 40))
        b = A @ np.repeat(rng.standard_normal(4), 10)
        reg = RegularizerSpec(order=1, levels=2, lam=1.0)
        _, report = constrained_l1(LinearOperator.from_matrix(A, precompute_normal=True), b, reg,
                                   SolverOptions(max_outer=2000, al_outer=15))
        feas = np.array(report.primal_residual)
        # non-strict decrease, with a small relative slack for inner inexactness
        assert np.all(np.diff(feas) <= 0.05 * feas[:-1] + 1e-12)

    def test_high_sampling_recovers_piecewise_constant(self):
        rng = np.random.default_rng(14)
        n = 128
        truth = np.repeat(rng.standard_normal(8), 16)
        truth /= np.abs(truth).max()
        op = random_sensing(115, n, 0.1, seed=21)
        b = op.apply(truth)
        f, _ = constrained_l1(op, b, RegularizerSpec(order=1, levels=1, lam=1.0),
                              SolverOptions(max_outer=1200, al_outer=25))
        assert np.linalg.norm(f - truth) / np.linalg.norm(truth) < 1e-2


class TestReports:
    def test_json_round_trip(self, tmp_path):
        import json
        b = np.random.default_rng(15).standard_normal(16)
        _, report = admm_l1(identity_operator(16), b,
                            RegularizerSpec(order=1, levels=1, lam=0.2),
                            SolverOptions(max_outer=50))
        path = tmp_path / "report.json"
        report.to_json(path)
        payload = json.loads(path.read_text())
        assert payload["iterations"] == report.iterations
        assert len(payload["objective"]) == len(report.objective)

    def test_traces_csv(self, tmp_path):
        b = np.random.default_rng(16).standard_normal(16)
        _, report = admm_l1(identity_operator(16), b,
                            RegularizerSpec(order=1, levels=1, lam=0.2),
                            SolverOptions(max_outer=30))
        path = tmp_path / "traces.csv"
        report.traces_to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "iteration,objective,primal_residual"
        assert len(lines) == 1 + report.iterations
