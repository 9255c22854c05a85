"""Seeded random problem generators for the property suites.

Leading terms are built from a time-varying invertible frame V(t):
``B = V[:, :r] Y`` and ``A = X [I_r 0] V⁻¹``, so ker A = span V[:, r:] and
im B = span V[:, :r] are transversal by construction and AB = XY.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .chain import ChainPoint, IndexFlag, assemble_chain_point, build_chain
from .errors import TsdaeError
from .matexpr import CallableMatrixFunction
from .projalg import SubspaceBasis, kernel_basis, orthogonal_complement
from .timescale import TimeScale

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 200


class GenerationFailed(TsdaeError):
    pass


@dataclass(frozen=True, eq=False)
class RandomProblem:
    A: CallableMatrixFunction
    B: CallableMatrixFunction
    C: CallableMatrixFunction
    f: CallableMatrixFunction
    ts: TimeScale
    chain: List[ChainPoint]

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[1]


def default_grid(points: int = 30) -> TimeScale:
    return TimeScale.uniform(0.0, 1.0, points)


def _well_conditioned(rng: np.random.Generator, rows: int, cols: int, cap: float = 50.0) -> np.ndarray:
    for _ in range(MAX_ATTEMPTS):
        M = rng.standard_normal((rows, cols))
        if np.linalg.cond(M) <= cap:
            return M
    raise GenerationFailed(f"no {rows}x{cols} matrix with condition number <= {cap}")


def _unit_norm(rng: np.random.Generator, n: int) -> np.ndarray:
    K = rng.standard_normal((n, n))
    return K / scipy.linalg.norm(K, 2)


def _leading_term(rng: np.random.Generator, n: int, m: int, r: int, drift: float = 0.3):
    V0 = _well_conditioned(rng, m, m)
    K = _unit_norm(rng, m)
    w, phase = rng.uniform(0.5, 2.0), rng.uniform(0, np.pi)
    X0, X1 = _well_conditioned(rng, n, r), rng.standard_normal((n, r))
    Y0, Y1 = _well_conditioned(rng, r, n), rng.standard_normal((r, n))
    eye = np.eye(m)

    def frame(t: float) -> np.ndarray:
        return V0 @ (eye + drift * np.sin(w * t + phase) * K)

    def A(t: float) -> np.ndarray:
        V = frame(t)
        X = X0 + 0.2 * np.sin(2.0 * t) * X1
        return X @ scipy.linalg.solve(V, eye)[:r, :]

    def B(t: float) -> np.ndarray:
        Y = Y0 + 0.2 * np.cos(t) * Y1
        return frame(t)[:, :r] @ Y

    return CallableMatrixFunction((n, m), A), CallableMatrixFunction((m, n), B)


def _coupling(rng: np.random.Generator, n: int):
    C0, C1 = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    f0, f1 = rng.standard_normal((n, 1)), rng.standard_normal((n, 1))
    C = CallableMatrixFunction((n, n), lambda t: C0 + 0.3 * np.sin(t) * C1)
    f = CallableMatrixFunction((n, 1), lambda t: f0 + 0.5 * np.cos(3.0 * t) * f1)
    return C, f


def _max_cond(chain: List[ChainPoint]) -> float:
    return max(float(np.linalg.cond(cp.G1)) for cp in chain)


def _generate(
    rng: np.random.Generator,
    n: int,
    m: int,
    r: int,
    ts: TimeScale,
    flag: IndexFlag,
    cond_cap: float,
) -> RandomProblem:
    for attempt in range(MAX_ATTEMPTS):
        A, B = _leading_term(rng, n, m, r)
        C, f = _coupling(rng, n)
        try:
            chain = build_chain(A, B, C, ts)
        except TsdaeError:
            continue
        if chain[0].index_flag is not flag or _max_cond(chain) > cond_cap:
            continue
        return RandomProblem(A=A, B=B, C=C, f=f, ts=ts, chain=chain)
    raise GenerationFailed(f"no {flag.value} instance with n={n} m={m} r={r} after {MAX_ATTEMPTS} attempts")


def random_index1_problem(
    rng: np.random.Generator,
    n: int,
    m: int,
    ts: Optional[TimeScale] = None,
    cond_cap: float = 1e3,
) -> RandomProblem:
    if n < 2:
        raise ValueError("index-1 instances need n >= 2")
    r = int(rng.integers(1, min(n - 1, m) + 1))
    return _generate(rng, n, m, r, ts or default_grid(), IndexFlag.index1, cond_cap)


def random_index0_problem(
    rng: np.random.Generator,
    n: int,
    m: int,
    ts: Optional[TimeScale] = None,
    cond_cap: float = 1e3,
) -> RandomProblem:
    if m < n:
        raise ValueError("index-0 instances need m >= n")
    return _generate(rng, n, m, n, ts or default_grid(), IndexFlag.index0, cond_cap)


def random_standard_problem(
    rng: np.random.Generator,
    n: int,
    ts: Optional[TimeScale] = None,
    cond_cap: float = 1e3,
    *,
    drift: float = 0.3,
) -> Tuple[CallableMatrixFunction, CallableMatrixFunction, CallableMatrixFunction]:
    """Square A with a kernel of constant dimension, plus C and f such that
    A + C Q is invertible (Q the orthogonal projector onto ker A).

    With ``drift=0`` the kernel itself is constant along the grid.
    """
    ts = ts or default_grid()
    for _ in range(MAX_ATTEMPTS):
        r = int(rng.integers(1, n))
        A, _ = _leading_term(rng, n, n, r, drift)
        C, f = _coupling(rng, n)
        ok = True
        for t in ts.points:
            At = A.evaluate(float(t))
            N = kernel_basis(At)
            if N.dim != n - r:
                ok = False
                break
            A1 = At + C.evaluate(float(t)) @ (N.basis @ N.basis.T)
            if np.linalg.cond(A1) > cond_cap:
                ok = False
                break
        if ok:
            return A, C, f
    raise GenerationFailed(f"no standard-form instance with n={n}")


def level1_instance(rng: np.random.Generator, n: int, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Constant (A, B, C) with dim N1 = k >= 1 and N0 ∩ N1 = {0}.

    N1 meets N0 trivially and Q0 maps N1 into N0, so k <= rank G0 <= n - k.
    """
    if not 1 <= k <= n // 2:
        raise ValueError(f"level-1 instances need 1 <= k <= n // 2, got k={k} n={n}")
    for _ in range(MAX_ATTEMPTS):
        m = int(rng.integers(k, n + 2))
        r = int(rng.integers(k, min(n - k, m) + 1))
        A, B = _leading_term(rng, n, m, r)
        A0, B0 = A.evaluate(0.0), B.evaluate(0.0)
        G0 = A0 @ B0
        N0 = kernel_basis(G0)
        if N0.dim != n - r:
            continue
        Q0 = N0.basis @ N0.basis.T
        Z = rng.standard_normal((n, k))
        Q0Z = Q0 @ Z
        if np.linalg.matrix_rank(Q0Z) < k:
            continue
        Cr = rng.standard_normal((n, n))
        C = Cr + (-G0 @ Z - Cr @ Q0Z) @ np.linalg.pinv(Q0Z)
        try:
            cp = assemble_chain_point(A0, B0, C, 0.0)
        except TsdaeError:
            continue
        N1 = kernel_basis(cp.G1)
        if N1.dim != k:
            continue
        if np.linalg.matrix_rank(np.hstack([N0.basis, N1.basis])) < N0.dim + k:
            continue
        return A0, B0, C
    raise GenerationFailed(f"no level-1 instance with n={n} k={k}")


def random_complement(rng: np.random.Generator, basis: SubspaceBasis, cond_cap: float = 1e3) -> SubspaceBasis:
    """A random complement S of span(basis) with cond([basis S]) <= cond_cap."""
    d = basis.ambient_dim
    perp = orthogonal_complement(basis)
    if basis.dim == 0 or perp.dim == 0:
        return perp
    for _ in range(MAX_ATTEMPTS):
        tilt = rng.standard_normal((basis.dim, perp.dim))
        S = perp.basis + basis.basis @ tilt
        if np.linalg.cond(np.hstack([basis.basis, S])) <= cond_cap:
            return SubspaceBasis(d, S, basis.tol)
    raise GenerationFailed("no well-conditioned complement")
