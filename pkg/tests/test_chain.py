import numpy as np
import pytest

from tsdae import worked_examples as wx
from tsdae.chain import (
    IndexFlag,
    alternative_chain,
    assemble_chain_point,
    build_chain,
    build_level1,
    classify_index,
    compare_chains,
    kernel_flow,
    kernel_sum_check,
)
from tsdae.errors import NotProperlyStated, ProjectorInvalid, RankDrift
from tsdae.instances import random_complement, random_index1_problem
from tsdae.matexpr import CallableMatrixFunction, MatrixFunction
from tsdae.timescale import TimeScale

# Constant pair with N0 = span e3 and G0 = diag(1, 1, 0)
A3 = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
B3 = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def test_index_one_point_has_consistent_chain():
    C = np.diag([0.0, 0.0, 1.0])
    cp = assemble_chain_point(A3, B3, C, 0.0)
    assert cp.index_flag is IndexFlag.index1
    assert classify_index(cp) is IndexFlag.index1
    assert (cp.r, cp.r1) == (2, 3)
    np.testing.assert_allclose(cp.Q0.matrix, np.diag([0.0, 0.0, 1.0]), atol=1e-14)
    np.testing.assert_allclose(cp.R.matrix, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(cp.Binv, B3.T, atol=1e-14)
    assert max(cp.residuals().values()) < 1e-14


def test_index_zero_point():
    cp = assemble_chain_point(np.eye(2), np.eye(2), np.ones((2, 2)), 1.0)
    assert cp.index_flag is IndexFlag.index0
    assert classify_index(cp) is IndexFlag.index0
    assert cp.N0.dim == 0


def test_level1_example_gives_oblique_q1_and_kernel_sum():
    C = np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    cp = assemble_chain_point(A3, B3, C, 0.0)
    assert cp.index_flag is IndexFlag.not_index_le_1
    assert cp.G1inv is None
    lvl = build_level1(cp)
    assert lvl.N1basis.dim == 1
    np.testing.assert_allclose(lvl.Q1.matrix, [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], atol=1e-12)
    np.testing.assert_allclose(lvl.Q1.matrix @ cp.Q0.matrix, 0.0, atol=1e-14)
    np.testing.assert_allclose(cp.P0.matrix @ lvl.P1.matrix, np.diag([0.0, 1.0, 0.0]), atol=1e-12)
    chk = kernel_sum_check(cp.P0, lvl, cp.N0)
    assert chk.ok
    assert (chk.dim_kernel, chk.expected_dim) == (2, 2)
    assert chk.annihilation < 1e-12


def test_non_transversal_leading_term_is_rejected():
    with pytest.raises(NotProperlyStated):
        assemble_chain_point(np.array([[1.0, 0.0]]), np.array([[0.0], [1.0]]), np.zeros((1, 1)), 0.0)


def test_caller_supplied_p0_must_vanish_on_ker_g0():
    C = np.diag([0.0, 0.0, 1.0])
    P0 = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    cp = assemble_chain_point(A3, B3, C, 0.0, P0=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]))
    assert cp.index_flag is IndexFlag.index1
    with pytest.raises(ProjectorInvalid):
        # idempotent, but its kernel is span (-0.5, 0, 1), not e3
        assemble_chain_point(A3, B3, C, 0.0, P0=P0)


def test_rank_drift_is_reported():
    ts = TimeScale.integer_range(0, 2)
    A = MatrixFunction.from_sources([["1", "0"], ["0", "t"]])
    B = MatrixFunction.from_sources([["1", "0"], ["0", "t"]])
    C = MatrixFunction.constant(np.eye(2))
    with pytest.raises(RankDrift) as info:
        build_chain(A, B, C, ts)
    assert info.value.quantity == "rank B"
    assert (info.value.t1, info.value.t2) == (0.0, 1.0)


def test_example2_chain_matches_closed_forms():
    ts = TimeScale.geometric(2, 1, 6)
    A = CallableMatrixFunction((5, 3), wx.ex2_A)
    B = CallableMatrixFunction((3, 5), wx.ex2_B)
    C = CallableMatrixFunction((5, 5), wx.ex2_C)
    chain = build_chain(A, B, C, ts)
    for cp in chain:
        assert cp.index_flag is IndexFlag.index1
        assert wx.close(cp.G0, wx.ex2_G0(cp.t), 1e-12)
        np.testing.assert_allclose(cp.Q0.matrix, wx.EX2_Q0, atol=1e-12)
        assert wx.close(cp.G1, wx.ex2_G1(cp.t), 1e-10)
        assert np.linalg.det(cp.G1) == pytest.approx(wx.ex2_det_G1(cp.t), rel=1e-9)


def test_alternative_projectors_give_equivalent_chains(rng):
    prob = random_index1_problem(rng, 5, 4, TimeScale.uniform(0.0, 1.0, 10))
    for cp in prob.chain:
        alt = alternative_chain(cp, random_complement(rng, cp.N0))
        cmp_ = compare_chains(cp, alt)
        assert cmp_.max_residual() < 1e-9, cmp_.identity_residuals
        assert cmp_.max_angle() < 1e-8, cmp_.angles
        # Z1 and its inverse I - Q0 Qb0 P0
        Zinv = np.eye(cp.n) - cp.Q0.matrix @ alt.Q0.matrix @ cp.P0.matrix
        np.testing.assert_allclose(cmp_.Z1 @ Zinv, np.eye(cp.n), atol=1e-9)


def test_kernel_flow_stays_in_kernel_of_example1_leading_term():
    A = CallableMatrixFunction((3, 3), wx.ex1_A)
    flow = kernel_flow(A, TimeScale.integer_range(0, 10), 0.0)
    assert len(flow.bases) == 11
    assert flow.max_kernel_residual() <= 1e-10
    assert flow.min_singular_value() > 1e-6
