"""Solver iteration, certificates, averages, and failure modes."""

import numpy as np
import pytest

from seqform import (DimensionError, DivergenceError, InitializationError,
                     SolverConfig, SparseMatrix, ergodic_average, init,
                     random_matrix_game, residual, simplex_game, solve, step)
from seqform.sparse import SpectralEstimate


@pytest.fixture
def trivial_game():
    # 1x1 zero game: the operator is a rotation, so the step size is exactly 1
    return simplex_game(SparseMatrix.zeros(1, 1))


@pytest.fixture
def pennies():
    return simplex_game(SparseMatrix.from_dense([[1.0, -1.0], [-1.0, 1.0]]))


def quad(state):
    return (state.y.tolist(), state.p.tolist(), state.x.tolist(), state.q.tolist())


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolverConfig(lambda_override=0.0)
    with pytest.raises(ValueError):
        SolverConfig(trace_every=-1)


def test_init_state(trivial_game):
    state = init(trivial_game)
    assert state.lam == 1.0
    assert state.norm_K == 1.0
    assert state.k == 0
    assert np.array_equal(state.z0, np.zeros(4))
    assert np.array_equal(state.iterate(), np.zeros(4))


def test_init_with_start(trivial_game):
    state = init(trivial_game, start=([0.5], [0.0], [1.0], [-1.0]))
    assert np.array_equal(state.z0, [0.5, 0.0, 1.0, -1.0])
    assert np.array_equal(state.iterate(), state.z0)
    with pytest.raises(DimensionError):
        init(trivial_game, start=([0.5, 0.5], [0.0], [1.0], [0.0]))


def test_init_requires_converged_norm_estimate(trivial_game, monkeypatch):
    import seqform.solver as solver_module

    monkeypatch.setattr(solver_module, "spectral_norm",
                        lambda *a, **k: SpectralEstimate(1.0, False, 5000))
    with pytest.raises(InitializationError, match="did not converge"):
        init(trivial_game)
    # an explicit step size skips the estimate entirely
    state = init(trivial_game, config=SolverConfig(lambda_override=0.25))
    assert state.lam == 0.25

    monkeypatch.setattr(solver_module, "spectral_norm",
                        lambda *a, **k: SpectralEstimate(0.0, True, 3))
    with pytest.raises(InitializationError, match="not positive"):
        init(trivial_game)


def test_first_step_hand_trace(trivial_game):
    # with lambda = 1 and a zero start: the first proximal pass leaves y at
    # zero, drives p to -1, lifts x to 1, and books the constraint defect in q
    state = init(trivial_game)
    step(state, trivial_game)
    assert quad(state) == ([1.0], [0.0], [1.0], [-1.0])
    assert state.k == 1


def test_second_step_hand_trace(trivial_game):
    state = init(trivial_game)
    step(state, trivial_game)
    step(state, trivial_game)
    assert quad(state) == ([1.0], [0.0], [1.0], [0.0])
    assert np.array_equal(state.v, [1.0, 0.0, 1.0, 0.0])
    assert residual(state) == np.sqrt(2.0) / 2.0


def test_second_step_with_stale_y_variant(trivial_game):
    config = SolverConfig(dq_uses_updated_y=False)
    state = init(trivial_game, config=config)
    step(state, trivial_game, config)
    step(state, trivial_game, config)
    assert quad(state) == ([2.0], [0.0], [1.0], [-1.0])


def test_dq_variant_changes_trajectory():
    game = random_matrix_game(5, 5, seed=1)
    a = solve(game, SolverConfig(epsilon=1e-12, max_iter=100))
    b = solve(game, SolverConfig(epsilon=1e-12, max_iter=100,
                                 dq_uses_updated_y=False))
    assert not np.array_equal(a.last.q, b.last.q)


def test_reclip_keeps_y_nonnegative():
    game = random_matrix_game(6, 6, seed=0)
    config = SolverConfig(reclip_y_after_correction=True)
    state = init(game, config=config)
    for _ in range(200):
        step(state, game, config)
        assert np.min(state.y) >= 0.0

    config = SolverConfig()
    state = init(game, config=config)
    dips = 0.0
    for _ in range(200):
        step(state, game, config)
        dips = min(dips, float(np.min(state.y)))
    # without the extra clip the correction overshoots below zero
    assert dips < 0.0


def test_residual_arithmetic(trivial_game):
    state = init(trivial_game, config=SolverConfig(lambda_override=0.5))
    with pytest.raises(ValueError):
        residual(state)
    state.k = 5
    assert residual(state) == 0.0
    state.v = np.array([2.0, 0.0, 0.0, 0.0])
    state.k = 4
    assert residual(state) == 1.0


def test_ergodic_average_is_running_mean(pennies):
    state = init(pennies)
    with pytest.raises(ValueError):
        ergodic_average(state)
    seen = []
    for _ in range(3):
        step(state, pennies)
        seen.append(state.iterate())
    avg = ergodic_average(state)
    stacked = np.mean(seen, axis=0)
    assert np.allclose(np.concatenate(avg), stacked, atol=1e-15, rtol=0.0)


def test_telescoping_identity():
    game = random_matrix_game(20, 20, seed=5)
    state = init(game)
    for _ in range(500):
        step(state, game)
        gap = np.max(np.abs(state.v - (state.iterate() - state.z0)))
        assert gap <= 1e-12


def test_trivial_game_convergence(trivial_game):
    report = solve(trivial_game, SolverConfig(epsilon=1e-2))
    # the iterates reach the fixed point after two steps, after which the
    # residual decays exactly like sqrt(2)/k
    assert report.converged
    assert report.iterations == 142
    assert 0.0099 < report.residual < 1e-2
    assert np.array_equal(report.x_plan, [1.0])
    assert np.array_equal(report.y_plan, [1.0])
    assert report.value == 0.0
    assert report.duality_gap == 0.0


def test_matching_pennies_solution(pennies):
    report = solve(pennies, SolverConfig(epsilon=1e-3))
    assert report.converged
    assert report.iterations == 2000
    # the symmetric start keeps both coordinates identical, so the
    # normalized averages sit exactly on the mixed equilibrium
    assert np.array_equal(report.x_plan, [0.5, 0.5])
    assert np.array_equal(report.y_plan, [0.5, 0.5])
    assert report.value == 0.0
    assert report.lam == 1.0 / report.norm_K


def test_non_convergence_reported(pennies):
    report = solve(pennies, SolverConfig(epsilon=1e-6, max_iter=100))
    assert not report.converged
    assert report.iterations == 100
    assert report.residual >= 1e-6


def test_solve_is_deterministic():
    game = random_matrix_game(30, 30, seed=2)
    a = solve(game, SolverConfig(epsilon=1e-3))
    b = solve(game, SolverConfig(epsilon=1e-3))
    assert a.iterations == b.iterations
    assert a.residual == b.residual
    assert a.value == b.value
    assert np.array_equal(a.x_plan, b.x_plan)
    assert np.array_equal(a.last.y, b.last.y)


def test_trace_schedule(pennies):
    report = solve(pennies, SolverConfig(epsilon=1e-3, trace_every=100))
    assert [t.iter for t in report.trace] == list(range(100, 2001, 100))
    report = solve(pennies, SolverConfig(epsilon=1e-3, max_iter=10, trace_every=7))
    assert [t.iter for t in report.trace] == [7, 10]
    report = solve(pennies, SolverConfig(epsilon=1e-3, max_iter=10))
    assert report.trace == []


def test_final_trace_point_matches_report(pennies):
    report = solve(pennies, SolverConfig(epsilon=1e-3, trace_every=100))
    last = report.trace[-1]
    assert last.iter == report.iterations
    assert last.residual == report.residual
    assert last.value == report.value
    assert last.duality_gap == report.duality_gap
    assert (last.feas_x, last.feas_y) == (report.feas.feas_x, report.feas.feas_y)
    assert last.p0 == report.last.p[0]
    assert last.neg_q0 == -report.last.q[0]


def test_divergence_raises(kuhn):
    _, game, _ = kuhn
    with pytest.raises(DivergenceError) as err:
        solve(game, SolverConfig(lambda_override=1e200))
    assert err.value.iteration == 1
    with pytest.raises(DivergenceError) as err:
        solve(game, SolverConfig(lambda_override=1e8))
    assert err.value.iteration == 18


def test_kuhn_converges_to_known_value(kuhn):
    _, game, _ = kuhn
    report = solve(game, SolverConfig(epsilon=1e-3))
    assert report.converged
    assert abs(report.value + 1.0 / 18.0) < 1e-3
    assert report.duality_gap < 1e-2
    assert max(report.feas.feas_x, report.feas.feas_y) < 1e-3
    # x is clipped every step; y's correction step may dip slightly negative
    assert report.feas.min_x >= 0.0
    assert report.feas.min_y > -1e-3
