import numpy as np
import pytest

from tsdae import worked_examples as wx


@pytest.mark.parametrize("t", [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
def test_example1_closed_forms_are_consistent(t):
    s = t + 1.0  # σ(t) on the integers
    P, Q = wx.ex1_P(t), wx.ex1_Q(t)
    np.testing.assert_allclose(P @ P, P)
    np.testing.assert_allclose(P + Q, np.eye(3))
    np.testing.assert_allclose(wx.ex1_A1(t), wx.ex1_A(t) + wx.ex1_C(t) @ Q)
    np.testing.assert_allclose(wx.ex1_A1(t) @ wx.ex1_A1inv(t), np.eye(3))
    np.testing.assert_allclose(wx.ex1_P_delta(t), wx.ex1_P(s) - P)
    np.testing.assert_allclose(wx.ex1_Ps_A1invs(t), wx.ex1_P(s) @ wx.ex1_A1inv(s))
    np.testing.assert_allclose(wx.ex1_Ps_A1invs_Cs(t), wx.ex1_Ps_A1invs(t) @ wx.ex1_C(s))
    np.testing.assert_allclose(wx.ex1_Qs_A1invs(t), wx.ex1_Q(s) @ wx.ex1_A1inv(s))
    np.testing.assert_allclose(wx.ex1_Qs_A1invs_Cs(t), wx.ex1_Qs_A1invs(t) @ wx.ex1_C(s))


@pytest.mark.parametrize("t", [0.0, 3.0])
def test_example1_projector_breaks_ap_equals_a_in_one_entry(t):
    diff = wx.ex1_A(t) @ wx.ex1_P(t) - wx.ex1_A(t)
    expected = np.zeros((3, 3))
    expected[2, 1] = wx.ex1_AP_minus_A_entry(t)
    np.testing.assert_allclose(diff, expected)


def test_example1_reference_coefficient_differs_in_one_entry():
    diff = wx.ex1_f_coefficient_reference(2.0) - wx.ex1_Ps_A1invs(2.0)
    expected = np.zeros((3, 3))
    expected[0, 2] = -2.0
    np.testing.assert_allclose(diff, expected)


@pytest.mark.parametrize("t", [1.0, 2.0, 4.0, 8.0, 16.0])
def test_example2_closed_forms_are_consistent(t):
    s = 2.0 * t  # σ(t) on the powers of two
    A, B, C = wx.ex2_A(t), wx.ex2_B(t), wx.ex2_C(t)
    np.testing.assert_allclose(A @ B, wx.ex2_G0(t))
    np.testing.assert_allclose(wx.ex2_G1(t), wx.ex2_G0(t) + C @ wx.EX2_Q0)
    np.testing.assert_allclose(wx.ex2_G1(t) @ wx.ex2_G1inv(t), np.eye(5), atol=1e-12)
    assert np.linalg.det(wx.ex2_G1(t)) == pytest.approx(wx.ex2_det_G1(t))
    np.testing.assert_allclose(B @ wx.ex2_Binv(t), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(wx.ex2_Binv(t) @ B, wx.EX2_P0, atol=1e-14)

    Gf = wx.ex2_B(s) @ wx.EX2_P0 @ wx.ex2_G1inv(s)
    assert wx.close(wx.ex2_Gf(t), Gf, 1e-14)
    assert wx.close(wx.ex2_Madv(t), Gf @ wx.ex2_C(s) @ wx.ex2_Binv(s), 1e-14)
    QG = wx.EX2_Q0 @ wx.ex2_G1inv(s)
    assert wx.close(wx.ex2_Q0s_G1invs(t), QG, 1e-14)
    assert wx.close(wx.ex2_Q0s_G1invs_Cs_Binvs(t), QG @ wx.ex2_C(s) @ wx.ex2_Binv(s), 1e-14)


def test_scaled_error():
    assert wx.scaled_error(np.array([1.0, 2.0]), np.array([1.0, 2.5])) == pytest.approx(0.2)
    assert wx.scaled_error(np.array([1e-3]), np.array([0.0])) == pytest.approx(1e-3)
    assert wx.scaled_error(np.ones(2), np.ones(3)) == float("inf")
    assert wx.scaled_error(np.empty(0), np.empty(0)) == 0.0
    assert wx.close(np.ones(2), np.ones(2), 0.0)
