"""Matrix chain G0 = AB, G1 = G0 + C Q0 per grid point, index classification,
level-1 projectors, comparison of admissible projector choices and the
propagation of kernel bases along the grid.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg

from .errors import AdmissibilityViolation, DimensionMismatch, NotProperlyStated, ProjectorInvalid, RankDrift
from .matexpr import TimeVaryingMatrix
from .projalg import (
    DEFAULT_TOL,
    Projector,
    ProjectorKind,
    SubspaceBasis,
    check_properly_stated,
    image_basis,
    kernel_basis,
    numerical_rank,
    oblique_projector,
    one_two_inverse,
    orthogonal_complement,
    projector_onto_span,
    subspace_gap,
)
from .timescale import TimeScale

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-8


class IndexFlag(str, enum.Enum):
    index0 = "index0"
    index1 = "index1"
    not_index_le_1 = "not_index_le_1"


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M)) if np.size(M) else 0.0


@dataclass(frozen=True, eq=False)
class ChainPoint:
    t: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    G0: np.ndarray
    G1: np.ndarray
    R: Projector
    P0: Projector
    Q0: Projector
    Binv: np.ndarray
    G1inv: Optional[np.ndarray]
    N0: SubspaceBasis
    r: int
    r1: int
    index_flag: IndexFlag

    @property
    def n(self) -> int:
        return int(self.G0.shape[0])

    @property
    def m(self) -> int:
        return int(self.B.shape[0])

    @property
    def invariant_map(self) -> np.ndarray:
        """B P0 B⁻, the projector whose image carries the inherent dynamics."""
        return self.B @ self.P0.matrix @ self.Binv

    def residuals(self) -> Dict[str, float]:
        n = self.n
        out = {
            "G0Q0=0": _norm(self.G0 @ self.Q0.matrix) / (1.0 + _norm(self.G0)),
            "Q0^2=Q0": self.Q0.idempotency_residual(),
        }
        if self.G1inv is not None:
            out["G1G1inv=I"] = _norm(self.G1 @ self.G1inv - np.eye(n))
            out["G1invG0=I-Q0"] = _norm(self.G1inv @ self.G0 - self.P0.matrix)
            out["G1invCQ0=Q0"] = _norm(self.G1inv @ self.C @ self.Q0.matrix - self.Q0.matrix)
        return out


def _flag_from_ranks(n: int, r: int, r1: int) -> IndexFlag:
    if r == n:
        return IndexFlag.index0
    if r1 == n:
        return IndexFlag.index1
    return IndexFlag.not_index_le_1


def classify_index(cp: ChainPoint, tol: float = DEFAULT_TOL) -> IndexFlag:
    return _flag_from_ranks(cp.n, numerical_rank(cp.G0, tol), numerical_rank(cp.G1, tol))


def _admissible_P0(P0: np.ndarray, N0: SubspaceBasis, tol: float) -> Projector:
    proj = Projector(P0, ProjectorKind.oblique)
    if not proj.is_valid(max(tol, 1e-10) * 1e2):
        raise ProjectorInvalid(f"P0 is not idempotent: |P0^2 - P0| = {proj.idempotency_residual():.3e}")
    n = proj.dim
    if numerical_rank(proj.matrix, tol) != n - N0.dim:
        raise ProjectorInvalid("ker P0 has the wrong dimension")
    if N0.dim and _norm(proj.matrix @ N0.basis) > CHECK_TOL * (1.0 + _norm(proj.matrix)):
        raise ProjectorInvalid("P0 does not vanish on ker G0")
    return proj


def assemble_chain_point(
    A: np.ndarray,
    B: np.ndarray,
    C: np.ndarray,
    t: float,
    tol: float = DEFAULT_TOL,
    P0: Optional[np.ndarray] = None,
    *,
    check_tol: float = CHECK_TOL,
) -> ChainPoint:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n, m = A.shape
    if B.shape != (m, n) or C.shape != (n, n):
        raise DimensionMismatch(
            f"expected A {n}x{m}, B {m}x{n}, C {n}x{n}; got B {B.shape}, C {C.shape}"
        )
    ps = check_properly_stated(A, B, tol)
    if not ps.passed:
        raise NotProperlyStated(
            f"(A, B) is not properly stated at t={t!r}: dim ker A={ps.dim_ker_A}, "
            f"dim im B={ps.dim_im_B}, m={m}, transversal={ps.transversal}",
            t=t,
        )
    G0 = A @ B
    N0 = kernel_basis(G0, tol)
    if P0 is None:
        Q0 = projector_onto_span(N0)
        P0p = Q0.complement()
    else:
        P0p = _admissible_P0(P0, N0, tol)
        Q0 = P0p.complement()
    R = oblique_projector(image_basis(B, tol), kernel_basis(A, tol))
    Binv = one_two_inverse(B, P0p, R, tol, check_tol=check_tol)
    G1 = G0 + C @ Q0.matrix
    r = numerical_rank(G0, tol)
    r1 = numerical_rank(G1, tol)
    flag = _flag_from_ranks(n, r, r1)
    G1inv = scipy.linalg.solve(G1, np.eye(n)) if r1 == n else None
    return ChainPoint(
        t=float(t), A=A, B=B, C=C, G0=G0, G1=G1, R=R, P0=P0p, Q0=Q0, Binv=Binv,
        G1inv=G1inv, N0=N0, r=r, r1=r1, index_flag=flag,
    )


def build_chain(
    A: TimeVaryingMatrix,
    B: TimeVaryingMatrix,
    C: TimeVaryingMatrix,
    ts: TimeScale,
    tol: float = DEFAULT_TOL,
    *,
    check_tol: float = CHECK_TOL,
) -> List[ChainPoint]:
    n, m = A.shape
    if tuple(B.shape) != (m, n) or tuple(C.shape) != (n, n):
        raise DimensionMismatch(f"expected A {n}x{m}, B {m}x{n}, C {n}x{n}; got B {B.shape}, C {C.shape}")
    points: List[ChainPoint] = []
    for t in ts.points:
        t = float(t)
        points.append(
            assemble_chain_point(A.evaluate(t), B.evaluate(t), C.evaluate(t), t, tol, check_tol=check_tol)
        )
    _assert_constant_ranks(points, tol)
    first = points[0]
    logger.info(
        f"build_chain points={len(points)} n={n} m={m} r={first.r} r1={first.r1} flag={first.index_flag.value}"
    )
    return points


def _assert_constant_ranks(points: List[ChainPoint], tol: float) -> None:
    first = points[0]
    rank_B0 = numerical_rank(first.B, tol)
    for cp in points[1:]:
        if numerical_rank(cp.B, tol) != rank_B0:
            raise RankDrift("rank B", first.t, cp.t, rank_B0, numerical_rank(cp.B, tol))
        if cp.r != first.r:
            raise RankDrift("rank G0", first.t, cp.t, first.r, cp.r)
        if cp.r1 != first.r1:
            raise RankDrift("rank G1", first.t, cp.t, first.r1, cp.r1)
        if cp.index_flag != first.index_flag:
            raise RankDrift("index", first.t, cp.t, first.index_flag.value, cp.index_flag.value)


# --- level 1 -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChainLevel1:
    N1basis: SubspaceBasis
    Q1: Projector
    P1: Projector


def _level1_projector(N0: SubspaceBasis, N1: SubspaceBasis, tol: float) -> Projector:
    n = N0.ambient_dim
    if N1.dim == 0:
        return Projector(np.zeros((n, n)), ProjectorKind.oblique)
    joint = N0.concat(N1)
    if numerical_rank(joint, tol) < N0.dim + N1.dim:
        raise AdmissibilityViolation(
            f"N0 and N1 intersect nontrivially (dim N0={N0.dim}, dim N1={N1.dim})"
        )
    rest = orthogonal_complement(image_basis(joint, tol))
    along = SubspaceBasis(n, np.hstack([N0.basis, rest.basis]), tol)
    return oblique_projector(N1, along)


def build_level1(cp: ChainPoint, tol: float = DEFAULT_TOL) -> ChainLevel1:
    """Q1 onto N1 = ker G1 along N0 ⊕ (N0 ⊕ N1)^⊥, so that Q1 Q0 = 0."""
    N1 = kernel_basis(cp.G1, tol)
    Q1 = _level1_projector(cp.N0, N1, tol)
    residual = _norm(Q1.matrix @ cp.Q0.matrix)
    if residual > CHECK_TOL * (1.0 + _norm(Q1.matrix)):
        raise AdmissibilityViolation(f"Q1 Q0 != 0 at t={cp.t!r} (residual {residual:.3e})", t=cp.t)
    return ChainLevel1(N1basis=N1, Q1=Q1, P1=Q1.complement())


@dataclass(frozen=True)
class KernelSumCheck:
    dim_kernel: int
    expected_dim: int
    annihilation: float

    @property
    def ok(self) -> bool:
        return self.dim_kernel == self.expected_dim


def kernel_sum_check(P0: Projector, lvl: ChainLevel1, N0: SubspaceBasis, tol: float = DEFAULT_TOL) -> KernelSumCheck:
    """ker(P0 P1) = N0 ⊕ N1: compare dimensions and check annihilation of both bases."""
    P0P1 = P0.matrix @ lvl.P1.matrix
    dim_kernel = kernel_basis(P0P1, tol).dim
    basis = N0.concat(lvl.N1basis)
    annihilation = _norm(P0P1 @ basis) if basis.size else 0.0
    return KernelSumCheck(dim_kernel, N0.dim + lvl.N1basis.dim, annihilation)


# --- alternative projectors --------------------------------------------------


@dataclass(frozen=True, eq=False)
class AlternativeChain:
    Q0: Projector
    P0: Projector
    Binv: np.ndarray
    G1: np.ndarray
    N1basis: SubspaceBasis
    Q1: Optional[Projector] = None


def alternative_chain(cp: ChainPoint, complement: SubspaceBasis, tol: float = DEFAULT_TOL) -> AlternativeChain:
    """Chain data for the oblique P̄0 along N0 onto span(complement)."""
    Qb0 = oblique_projector(cp.N0, complement)
    # ker P̄0 = N0
    Pb0 = Qb0.complement()
    Bbinv = one_two_inverse(cp.B, Pb0, cp.R, tol, check_tol=CHECK_TOL)
    Gb1 = cp.G0 + cp.C @ Qb0.matrix
    Nb1 = kernel_basis(Gb1, tol)
    Qb1 = _level1_projector(cp.N0, Nb1, tol) if Nb1.dim else None
    return AlternativeChain(Q0=Qb0, P0=Pb0, Binv=Bbinv, G1=Gb1, N1basis=Nb1, Q1=Qb1)


@dataclass(frozen=True, eq=False)
class ChainComparison:
    Z1: np.ndarray
    identity_residuals: Dict[str, float] = field(default_factory=dict)
    angles: Dict[str, float] = field(default_factory=dict)

    def max_residual(self) -> float:
        return max(self.identity_residuals.values(), default=0.0)

    def max_angle(self) -> float:
        return max(self.angles.values(), default=0.0)


def compare_chains(cp: ChainPoint, alt: AlternativeChain, tol: float = DEFAULT_TOL) -> ChainComparison:
    n = cp.n
    Q0, P0 = cp.Q0.matrix, cp.P0.matrix
    Qb0, Pb0 = alt.Q0.matrix, alt.P0.matrix
    Z1 = np.eye(n) + Q0 @ Qb0 @ P0

    def rel(M: np.ndarray, ref: np.ndarray) -> float:
        return _norm(M) / (1.0 + _norm(ref))

    residuals = {
        "Q0Qb0=Qb0": rel(Q0 @ Qb0 - Qb0, Qb0),
        "Qb0Q0=Q0": rel(Qb0 @ Q0 - Q0, Q0),
        "P0Pb0=P0": rel(P0 @ Pb0 - P0, P0),
        "Pb0P0=Pb0": rel(Pb0 @ P0 - Pb0, Pb0),
        "G0Q0=0": rel(cp.G0 @ Q0, cp.G0),
        "G0Qb0=0": rel(cp.G0 @ Qb0, cp.G0),
        "Bbinv=Pb0Binv": rel(alt.Binv - Pb0 @ cp.Binv, alt.Binv),
        "Gb1=G1Z1": rel(alt.G1 - cp.G1 @ Z1, alt.G1),
    }

    N1 = kernel_basis(cp.G1, tol)
    Z1inv_N1 = image_basis((np.eye(n) - Q0 @ Qb0 @ P0) @ N1.basis, tol) if N1.dim else SubspaceBasis.empty(n)
    angles = {
        "im G1": subspace_gap(image_basis(cp.G1, tol), image_basis(alt.G1, tol)),
        "N0": subspace_gap(image_basis(Q0, tol), image_basis(Qb0, tol)),
        "N0+N1": subspace_gap(
            image_basis(cp.N0.concat(N1), tol) if cp.N0.dim + N1.dim else SubspaceBasis.empty(n),
            image_basis(cp.N0.concat(alt.N1basis), tol) if cp.N0.dim + alt.N1basis.dim else SubspaceBasis.empty(n),
        ),
        "Nb1=Z1inv N1": subspace_gap(Z1inv_N1, alt.N1basis),
    }
    return ChainComparison(Z1=Z1, identity_residuals=residuals, angles=angles)


# --- kernel flow -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelFlow:
    points: List[float]
    bases: List[np.ndarray]
    kernel_residuals: List[float]
    smin: List[float]

    def max_kernel_residual(self) -> float:
        return max(self.kernel_residuals, default=0.0)

    def min_singular_value(self) -> float:
        return min(self.smin, default=float("inf"))


def kernel_flow(A: TimeVaryingMatrix, ts: TimeScale, t0: float, tol: float = DEFAULT_TOL) -> KernelFlow:
    """Propagate a basis of ker A(t0) by n(σ(t)) = n(t) + μ(t) Q^Δ(t) n(t).

    Q is the orthogonal projector onto ker A(t). On a right-scattered point
    the recursion reduces to n(σ(t)) = Q(σ(t)) n(t), which stays in the kernel.
    """
    start = ts.index_of(t0)
    pts = [float(p) for p in ts.points[start:]]
    mats = [A.evaluate(t) for t in pts]
    kernels = [kernel_basis(M, tol) for M in mats]
    for t, K in zip(pts[1:], kernels[1:]):
        if K.dim != kernels[0].dim:
            raise RankDrift("dim ker A", pts[0], t, kernels[0].dim, K.dim)
    Qs = [projector_onto_span(K).matrix for K in kernels]

    basis = np.array(kernels[0].basis)
    bases = [basis]
    for i in range(len(pts) - 1):
        mu = pts[i + 1] - pts[i]
        Qdelta = (Qs[i + 1] - Qs[i]) / mu
        basis = basis + mu * Qdelta @ basis
        bases.append(basis)

    residuals: List[float] = []
    smin: List[float] = []
    for M, nb in zip(mats, bases):
        if nb.shape[1] == 0:
            residuals.append(0.0)
            smin.append(float("inf"))
            continue
        residuals.append(_norm(M @ nb) / max(_norm(nb), 1e-300))
        smin.append(float(scipy.linalg.svdvals(nb)[-1]))
    return KernelFlow(points=pts, bases=bases, kernel_residuals=residuals, smin=smin)
