"""Closed-form matrices of the two bundled worked examples, as functions of t.

example1: standard form on the integers 0, 1, 2, ... with a user-supplied P
that is idempotent but not along ker A (A·P - A has entry (3,2) = -(t+1)).
Its f-coefficient is stored as recomputed; the reference display shows -1 at
entry (1,3) where the product P^σ (A1⁻¹)^σ gives +1.

example2: properly stated form on the powers of two 1, 2, 4, ... (σ(t) = 2t).
"""

from __future__ import annotations

from typing import Callable, Dict

import numpy as np

Matrix = Callable[[float], np.ndarray]


def _m(rows) -> np.ndarray:
    return np.array(rows, dtype=float)


# --- example 1 ---------------------------------------------------------------


def ex1_A(t: float) -> np.ndarray:
    return _m([[-1, t + 1, -1], [0, 0, 0], [0, 2 * t + 2, -1]])


def ex1_C(t: float) -> np.ndarray:
    return _m([[0, 0, 1], [0, -t, 1], [0, 2, 1]])


def ex1_P(t: float) -> np.ndarray:
    return _m([[1, 0, 0], [0, 0, 0], [0, -(t + 1), 1]])


def ex1_Q(t: float) -> np.ndarray:
    return _m([[0, 0, 0], [0, 1, 0], [0, t + 1, 0]])


def ex1_A1(t: float) -> np.ndarray:
    return _m([[-1, 2 * (t + 1), -1], [0, 1, 0], [0, 3 * t + 5, -1]])


def ex1_A1inv(t: float) -> np.ndarray:
    return _m([[-1, -(t + 3), 1], [0, 1, 0], [0, 3 * t + 5, -1]])


def ex1_P_delta(t: float) -> np.ndarray:
    return _m([[0, 0, 0], [0, 0, 0], [0, -1, 0]])


def ex1_Ps_A1invs(t: float) -> np.ndarray:
    return _m([[-1, -(t + 4), 1], [0, 0, 0], [0, 2 * (t + 3), -1]])


def ex1_Ps_A1invs_Cs(t: float) -> np.ndarray:
    return _m([[0, (t + 2) * (t + 3), -(t + 4)], [0, 0, 0], [0, -2 * (t + 2) ** 2, 2 * t + 5]])


def ex1_Qs_A1invs(t: float) -> np.ndarray:
    return _m([[0, 0, 0], [0, 1, 0], [0, t + 2, 0]])


def ex1_Qs_A1invs_Cs(t: float) -> np.ndarray:
    return _m([[0, 0, 0], [0, -t - 1, 1], [0, -(t + 1) * (t + 2), t + 2]])


def ex1_f_coefficient_reference(t: float) -> np.ndarray:
    return _m([[-1, -(t + 4), -1], [0, 0, 0], [0, 2 * (t + 3), -1]])


def ex1_AP_minus_A_entry(t: float) -> float:
    """Entry (3,2) of A(t)P(t) - A(t)."""
    return -(t + 1)


EXAMPLE1_DECOUPLED: Dict[str, Matrix] = {
    "Mdet": ex1_P_delta,
    "Madv": ex1_Ps_A1invs_Cs,
    "Gf": ex1_Ps_A1invs,
    "Valg": lambda t: -ex1_Qs_A1invs_Cs(t),
    "Vf": lambda t: -ex1_Qs_A1invs(t),
}


# --- example 2 ---------------------------------------------------------------


def ex2_A(t: float) -> np.ndarray:
    return _m([[t, 0, 0], [0, 1, 0], [0, 0, t**2], [0, 0, 0], [0, 0, 0]])


def ex2_B(t: float) -> np.ndarray:
    return _m([[t, 0, 0, 0, 0], [0, t**2, 0, 0, 0], [0, 0, 1, 0, 0]])


def ex2_C(t: float) -> np.ndarray:
    return _m(
        [
            [0, 0, 0, -1, 1],
            [0, 0, t, 1, 0],
            [0, -1, 0, 0, 0],
            [-1, 1, 0, -(t**2), 0],
            [1, 0, 0, 0, t**2],
        ]
    )


def ex2_G0(t: float) -> np.ndarray:
    return np.diag([t**2, t**2, t**2, 0.0, 0.0])


EX2_Q0 = np.diag([0.0, 0.0, 0.0, 1.0, 1.0])
EX2_P0 = np.diag([1.0, 1.0, 1.0, 0.0, 0.0])


def ex2_G1(t: float) -> np.ndarray:
    s = t**2
    return _m(
        [
            [s, 0, 0, -1, 1],
            [0, s, 0, 1, 0],
            [0, 0, s, 0, 0],
            [0, 0, 0, -s, 0],
            [0, 0, 0, 0, s],
        ]
    )


def ex2_det_G1(t: float) -> float:
    return -(t**10)


def ex2_G1inv(t: float) -> np.ndarray:
    a, b = 1 / t**2, 1 / t**4
    return _m(
        [
            [a, 0, 0, -b, -b],
            [0, a, 0, b, 0],
            [0, 0, a, 0, 0],
            [0, 0, 0, -a, 0],
            [0, 0, 0, 0, a],
        ]
    )


def ex2_Binv(t: float) -> np.ndarray:
    return _m([[1 / t, 0, 0], [0, 1 / t**2, 0], [0, 0, 1], [0, 0, 0], [0, 0, 0]])


def ex2_Madv(t: float) -> np.ndarray:
    return _m(
        [
            [0, -1 / (32 * t**5), 0],
            [-1 / (8 * t**3), 1 / (16 * t**4), 2 * t],
            [0, -1 / (16 * t**4), 0],
        ]
    )


def ex2_Gf(t: float) -> np.ndarray:
    return _m(
        [
            [1 / (2 * t), 0, 0, -1 / (8 * t**3), -1 / (8 * t**3)],
            [0, 1, 0, 1 / (4 * t**2), 0],
            [0, 0, 1 / (4 * t**2), 0, 0],
        ]
    )


def ex2_Q0s_G1invs_Cs_Binvs(t: float) -> np.ndarray:
    return _m(
        [
            [0, 0, 0],
            [0, 0, 0],
            [0, 0, 0],
            [1 / (8 * t**3), -1 / (16 * t**4), 0],
            [1 / (8 * t**3), 0, 0],
        ]
    )


def ex2_Q0s_G1invs(t: float) -> np.ndarray:
    return np.diag([0.0, 0.0, 0.0, -1 / (4 * t**2), 1 / (4 * t**2)])


EXAMPLE2_DECOUPLED: Dict[str, Matrix] = {
    "Mdet": lambda t: np.zeros((3, 3)),
    "Madv": ex2_Madv,
    "Gf": ex2_Gf,
    "Valg": lambda t: -ex2_Q0s_G1invs_Cs_Binvs(t),
    "Vf": lambda t: -ex2_Q0s_G1invs(t),
}


def scaled_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """Largest entrywise deviation relative to the size of the expected matrix."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if actual.shape != expected.shape:
        return float("inf")
    if expected.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(actual - expected))) / scale


def close(actual: np.ndarray, expected: np.ndarray, rtol: float) -> bool:
    return scaled_error(actual, expected) <= rtol
