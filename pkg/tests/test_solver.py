import numpy as np
import pytest

from tsdae import worked_examples as wx
from tsdae.decouple import build_proper, build_standard, reversibility_residual
from tsdae.errors import (
    DimensionMismatch,
    InputError,
    InsufficientTrajectory,
    NonRegressiveStep,
    NotAGridPoint,
    OracleStepSingular,
)
from tsdae.instances import random_index0_problem, random_index1_problem
from tsdae.matexpr import CallableMatrixFunction, MatrixFunction
from tsdae.solver import (
    direct_recursion_oracle,
    homogeneity_gap,
    invariance_check,
    relative_gap,
    solve,
    step_inherent,
)
from tsdae.timescale import TimeScale

X0 = np.array([1.0, 1.0, 1.0, 0.0, 0.0])


def _forcing(scale=1.0):
    e1 = np.array([[scale], [0.0], [0.0], [0.0], [0.0]])
    return CallableMatrixFunction((5, 1), lambda t: e1)


@pytest.fixture
def example2():
    ts = TimeScale.geometric(2, 1, 6)
    A = CallableMatrixFunction((5, 3), wx.ex2_A)
    B = CallableMatrixFunction((3, 5), wx.ex2_B)
    C = CallableMatrixFunction((5, 5), wx.ex2_C)
    f = _forcing()
    return A, B, C, f, ts, build_proper(A, B, C, f, ts)


def test_example2_solution_satisfies_the_equation(example2):
    A, B, C, f, ts, ds = example2
    traj = solve(ds, X0, t0=1.0)
    assert traj.notes == []
    assert reversibility_residual(A, B, C, f, traj.states(), ts) <= 1e-8
    assert invariance_check(traj, ds).passed
    assert np.all(np.isnan(traj.x_sigma[-1]))
    assert np.all(np.isnan(traj.v_sigma[-1]))
    assert np.all(np.isfinite(traj.states()))
    assert traj.max_step_cond() >= 1.0


def test_example2_solution_matches_direct_recursion(example2):
    A, B, C, f, ts, ds = example2
    traj = solve(ds, X0)
    oracle = direct_recursion_oracle(A, B, C, f, ts, X0)
    assert oracle.u is None
    assert relative_gap(traj.x_sigma, oracle.x_sigma) <= 1e-8


def test_example2_single_step(example2):
    *_, ds = example2
    u = ds.initial_map @ X0
    traj = solve(ds, X0)
    np.testing.assert_allclose(step_inherent(ds, u, 1.0), traj.u[1])


def test_solution_is_linear_in_forcing_and_initial_value(example2):
    A, B, C, _, ts, ds = example2
    ds2 = build_proper(A, B, C, _forcing(2.0), ts)
    assert homogeneity_gap(ds, ds2, X0) <= 1e-12


def test_discarded_q0_component_of_initial_value_is_noted(example2):
    *_, ds = example2
    consistent = solve(ds, X0)
    traj = solve(ds, np.array([1.0, 1.0, 1.0, 1.0, 0.0]))
    assert len(traj.notes) == 1
    assert "discarded" in traj.notes[0]
    assert "inconsistent" not in traj.notes[0]
    # only B P0 x0 enters the solution
    np.testing.assert_allclose(traj.x_sigma[:-1], consistent.x_sigma[:-1])


def test_initial_point_and_value_are_checked(example2):
    *_, ds = example2
    with pytest.raises(InputError):
        solve(ds, X0, t0=2.0)
    with pytest.raises(NotAGridPoint):
        solve(ds, X0, t0=1.5)
    with pytest.raises(DimensionMismatch):
        solve(ds, np.ones(3))
    with pytest.raises(DimensionMismatch):
        step_inherent(ds, np.ones(5), 1.0)


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_random_index1_solution_matches_direct_recursion(seed):
    rng = np.random.default_rng(seed)
    ts = TimeScale.uniform(0.0, 1.0, 15)
    prob = random_index1_problem(rng, 4, 3, ts)
    ds = build_proper(prob.A, prob.B, prob.C, prob.f, ts, chain=prob.chain)
    x0 = rng.standard_normal(prob.n)
    try:
        oracle = direct_recursion_oracle(prob.A, prob.B, prob.C, prob.f, ts, x0)
        traj = solve(ds, x0)
    except (OracleStepSingular, NonRegressiveStep):
        pytest.skip("singular step for this draw")
    assert relative_gap(traj.x_sigma, oracle.x_sigma) <= 1e-8
    assert invariance_check(traj, ds).passed
    assert reversibility_residual(prob.A, prob.B, prob.C, prob.f, traj.states(), ts) <= 1e-8


def test_index0_problem_has_no_algebraic_part(rng):
    ts = TimeScale.uniform(0.0, 1.0, 10)
    prob = random_index0_problem(rng, 3, 3, ts)
    ds = build_proper(prob.A, prob.B, prob.C, prob.f, ts, chain=prob.chain)
    traj = solve(ds, np.ones(3))
    np.testing.assert_allclose(traj.v_sigma[:-1], 0.0, atol=1e-12)
    oracle = direct_recursion_oracle(prob.A, prob.B, prob.C, prob.f, ts, np.ones(3))
    assert relative_gap(traj.x_sigma, oracle.x_sigma) <= 1e-8


def test_unit_coefficient_on_integers_is_not_regressive():
    ts = TimeScale.integer_range(0, 3)
    one = MatrixFunction.constant(np.ones((1, 1)))
    ds = build_proper(one, one, one, None, ts)
    with pytest.raises(NonRegressiveStep) as info:
        solve(ds, np.ones(1))
    assert info.value.t == 0.0
    with pytest.raises(OracleStepSingular):
        direct_recursion_oracle(one, one, one, None, ts, np.ones(1))


def test_reversibility_needs_defined_states(example2):
    A, B, C, f, ts, _ = example2
    with pytest.raises(InsufficientTrajectory):
        reversibility_residual(A, B, C, f, np.full((len(ts), 5), np.nan), ts)
    with pytest.raises(InsufficientTrajectory):
        reversibility_residual(A, B, C, f, np.zeros((2, 5)), ts)


def test_corrupted_state_breaks_reversibility(example2):
    A, B, C, f, ts, ds = example2
    states = solve(ds, X0).states()
    states[3] += np.array([5.0, -3.0, 2.0, 1.0, 4.0])
    assert reversibility_residual(A, B, C, f, states, ts) > 0.1


def test_inherent_state_outside_the_invariant_subspace_is_flagged(rng):
    ts = TimeScale.uniform(0.0, 1.0, 10)
    prob = random_index1_problem(rng, 4, 4, ts)
    ds = build_proper(prob.A, prob.B, prob.C, prob.f, ts, chain=prob.chain)
    W0 = ds.invariant_maps[0]
    u0 = (np.eye(4) - W0) @ rng.standard_normal(4)
    assert np.linalg.norm(u0) > 1e-3
    try:
        traj = solve(ds, np.zeros(4), u0=u0)
    except NonRegressiveStep:
        pytest.skip("singular step for this draw")
    report = invariance_check(traj, ds)
    assert not report.passed
    assert report.flagged[0] == 0.0
    assert invariance_check(solve(ds, np.ones(4)), ds).passed


def test_half_coefficient_recursion_doubles_each_step():
    # x^Δ = x^σ / 2 on the integers: x(t + 1) = 2 x(t)
    ts = TimeScale.integer_range(0, 8)
    one = MatrixFunction.constant(np.ones((1, 1)))
    half = MatrixFunction.constant(np.full((1, 1), 0.5))
    ds = build_standard(one, half, one, None, ts)
    u = np.array([3.0])
    for t in range(8):
        u = step_inherent(ds, u, float(t))
        assert u[0] == pytest.approx(3.0 * 2.0 ** (t + 1))
    traj = solve(ds, np.array([3.0]))
    np.testing.assert_allclose(traj.u[:, 0], 3.0 * 2.0 ** np.arange(9))
    assert traj.notes == []
