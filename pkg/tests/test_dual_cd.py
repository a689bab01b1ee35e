"""Dual coordinate descent: univariate updates, convergence, duality checks."""

from __future__ import annotations

import numpy as np
import pytest

from tracesvm import (
    ConfigError,
    DegenerateLabelsError,
    DualConfig,
    NonConvergenceWarning,
    SgdConfig,
    cd_update,
    dual_objective,
    init_state,
    projected_gradient,
    q_entry,
    train_dual_cd,
    train_sgd,
)
from tracesvm.linear_model import predict_many
from test_sgd import matrix_from_dense
from oracles import augmented_q_matrix, box_constrained_min

TWO_POINT_ROWS = [[1.0], [-1.0]]
TWO_POINT_Y = np.array([1, -1])


def random_problem(rng, n=3, dim=3):
    rows = rng.normal(size=(n, dim))
    rows[np.abs(rows) < 0.05] = 0.2
    y = rng.choice([-1, 1], size=n)
    while len(set(y.tolist())) < 2:
        y = rng.choice([-1, 1], size=n)
    return rows, y


class TestQEntry:
    def test_augmented_self_product(self):
        m = matrix_from_dense([[1.0]])
        assert q_entry(0, 0, m, [1]) == 2.0  # x.x + bias coord

    def test_label_sign_flip(self):
        m = matrix_from_dense(TWO_POINT_ROWS)
        assert q_entry(0, 1, m, TWO_POINT_Y) == 0.0  # (-1)*( -1 + 1 )
        assert q_entry(0, 0, m, TWO_POINT_Y) == 2.0

    def test_diagonal_nonnegative(self):
        rng = np.random.default_rng(0)
        rows, y = random_problem(rng)
        m = matrix_from_dense(rows)
        for i in range(len(rows)):
            assert q_entry(i, i, m, y) >= 0.0


class TestStateOps:
    def test_initial_objective_zero(self):
        m = matrix_from_dense(TWO_POINT_ROWS)
        assert dual_objective(init_state(m)) == 0.0

    def test_projected_gradient_at_bounds(self):
        m = matrix_from_dense(TWO_POINT_ROWS)
        state = init_state(m)
        # at alpha=0 the initial gradient is -1; pushing inward keeps it
        assert projected_gradient(0, state, m, TWO_POINT_Y, C=1.0) == -1.0
        # a positive gradient at the lower bound is projected away
        state.w[:] = [10.0, 0.0]
        assert projected_gradient(0, state, m, TWO_POINT_Y, C=1.0) == 0.0

    def test_cd_update_no_op_when_gradient_zero(self):
        m = matrix_from_dense(TWO_POINT_ROWS)
        state = init_state(m)
        state.alpha_dual[0] = 0.5
        state.w[:] = [0.5, 0.5]  # makes G_0 = (0.5 + 0.5) - 1 = 0
        out = cd_update(0, state, m, TWO_POINT_Y, C=1.0)
        assert np.array_equal(out.alpha_dual, state.alpha_dual)
        assert np.array_equal(out.w, state.w)

    def test_cd_update_matches_univariate_line_scan(self):
        rng = np.random.default_rng(3)
        rows, y = random_problem(rng)
        m = matrix_from_dense(rows)
        C = 2.0
        state = init_state(m)
        for i in (0, 1, 2, 0):
            out = cd_update(i, state, m, y, C)
            # scan the i-th coordinate of the dual objective directly
            Q = augmented_q_matrix(rows, y)
            grid = np.linspace(0.0, C, 4001)
            best = None
            for a in grid:
                trial = state.alpha_dual.copy()
                trial[i] = a
                val = 0.5 * trial @ Q @ trial - trial.sum()
                if best is None or val < best[0]:
                    best = (val, a)
            assert out.alpha_dual[i] == pytest.approx(best[1], abs=C / 4000 + 1e-9)
            state = out

    def test_cd_update_is_pure(self):
        m = matrix_from_dense(TWO_POINT_ROWS)
        state = init_state(m)
        cd_update(0, state, m, TWO_POINT_Y, C=1.0)
        assert np.array_equal(state.alpha_dual, [0.0, 0.0])
        assert np.array_equal(state.w, [0.0, 0.0])


class TestTrainDualCd:
    def test_analytic_two_point_problem(self):
        m = matrix_from_dense(TWO_POINT_ROWS)
        model = train_dual_cd(m, TWO_POINT_Y, DualConfig(C=10.0, tol=1e-8, seed=0))
        assert model.weights[0] == pytest.approx(1.0, abs=1e-3)
        assert model.bias == pytest.approx(0.0, abs=1e-3)
        assert model.metadata["converged"] is True
        # optimum alpha = (1/2, 1/2) gives dual objective -1/2
        assert model.metadata["dual_objective"] == pytest.approx(-0.5, abs=1e-6)

    def test_two_point_objective_matches_brute_force(self):
        Q = augmented_q_matrix(TWO_POINT_ROWS, TWO_POINT_Y)
        ref, ref_pt = box_constrained_min(Q, C=10.0, resolution=21)
        assert ref == pytest.approx(-0.5, abs=1e-6)
        assert ref_pt == pytest.approx([0.5, 0.5], abs=1e-3)

    def test_matches_brute_force_on_random_problems(self):
        rng = np.random.default_rng(12)
        for _ in range(6):
            rows, y = random_problem(rng)
            m = matrix_from_dense(rows)
            for C in (0.1, 1.0, 10.0):
                model = train_dual_cd(m, y, DualConfig(C=C, tol=1e-9, max_outer=5000, seed=0))
                ref, _ = box_constrained_min(augmented_q_matrix(rows, y), C=C)
                assert model.metadata["dual_objective"] == pytest.approx(ref, abs=1e-4)

    def test_monotone_descent_and_feasibility(self):
        rng = np.random.default_rng(4)
        rows, y = random_problem(rng)
        m = matrix_from_dense(rows)
        C = 1.0
        values = []
        train_dual_cd(
            m, y, DualConfig(C=C, tol=1e-9, seed=0),
            callback=lambda s: values.append(
                (dual_objective(s), s.alpha_dual.min(), s.alpha_dual.max())
            ),
        )
        objs = [v[0] for v in values]
        assert all(b <= a + 1e-10 for a, b in zip(objs, objs[1:]))
        assert all(lo >= 0.0 and hi <= C for _, lo, hi in values)

    def test_weight_identity(self):
        rng = np.random.default_rng(9)
        rows, y = random_problem(rng, n=6, dim=4)
        m = matrix_from_dense(rows)
        states = []
        model = train_dual_cd(
            m, y, DualConfig(C=1.0, tol=1e-8, seed=1), callback=lambda s: states.append(s)
        )
        final = states[-1]
        rebuilt = np.zeros(m.dim + 1)
        for i, row in enumerate(m.rows):
            rebuilt[row.indices] += final.alpha_dual[i] * y[i] * row.values
            rebuilt[-1] += final.alpha_dual[i] * y[i]
        assert np.allclose(final.w, rebuilt, atol=1e-8, rtol=0)
        assert np.allclose(model.weights, rebuilt[:-1], atol=1e-12, rtol=0)

    def test_kkt_spot_checks(self):
        rng = np.random.default_rng(15)
        rows, y = random_problem(rng, n=5, dim=3)
        m = matrix_from_dense(rows)
        C, tol = 1.0, 1e-8
        states = []
        model = train_dual_cd(
            m, y, DualConfig(C=C, tol=tol, seed=2), callback=lambda s: states.append(s)
        )
        assert model.metadata["converged"]
        state = states[-1]
        band = 10 * tol
        for i, row in enumerate(m.rows):
            g = y[i] * (float(row.values @ state.w[row.indices]) + state.w[-1]) - 1.0
            a = state.alpha_dual[i]
            if a < band:
                assert g >= -band
            elif a > C - band:
                assert g <= band
            else:
                assert abs(g) <= band

    def test_deterministic_bitwise(self):
        rng = np.random.default_rng(21)
        rows, y = random_problem(rng, n=8, dim=5)
        m = matrix_from_dense(rows)
        cfg = DualConfig(C=1.0, tol=1e-6, seed=3)
        a = train_dual_cd(m, y, cfg)
        b = train_dual_cd(m, y, cfg)
        assert np.array_equal(a.weights, b.weights)
        assert a.bias == b.bias

    def test_agrees_with_sgd_on_separable_toy(self):
        rows = [[1.0, 0.0], [0.8, 0.0], [0.0, 1.0], [0.0, 0.7]]
        y = np.array([1, 1, -1, -1])
        m = matrix_from_dense(rows)
        dual = train_dual_cd(m, y, DualConfig(C=10.0, tol=1e-8, seed=0))
        sgd = train_sgd(m, y, SgdConfig(alpha=1e-4, epochs=100, tol=0.0, seed=0))
        assert np.array_equal(predict_many(dual, m), y)
        assert np.array_equal(predict_many(sgd, m), predict_many(dual, m))

    def test_non_convergence_warns_but_returns(self):
        rng = np.random.default_rng(30)
        rows, y = random_problem(rng, n=6, dim=4)
        m = matrix_from_dense(rows)
        with pytest.warns(NonConvergenceWarning):
            model = train_dual_cd(m, y, DualConfig(C=10.0, tol=1e-12, max_outer=1, seed=0))
        assert model.metadata["converged"] is False
        assert model.metadata["outer_iters"] == 1

    def test_zero_norm_rows_keep_alpha_zero(self):
        rows = [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]
        y = np.array([1, 1, -1])
        m = matrix_from_dense(rows)
        states = []
        train_dual_cd(
            m, y, DualConfig(C=1.0, tol=1e-8, seed=0), callback=lambda s: states.append(s)
        )
        assert states[-1].alpha_dual[1] == 0.0

    def test_degenerate_labels(self):
        m = matrix_from_dense(TWO_POINT_ROWS)
        with pytest.raises(DegenerateLabelsError):
            train_dual_cd(m, np.array([1, 1]), DualConfig())

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            DualConfig(C=0.0)
        with pytest.raises(ConfigError):
            DualConfig(tol=0.0)
        with pytest.raises(ConfigError):
            DualConfig(max_outer=0)
