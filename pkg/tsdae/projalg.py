"""Numerical-rank linear algebra: subspace bases, projectors, transversality
and the reflexive {1,2}-inverse fixed by B⁻B = P0 and BB⁻ = R.

Ranks use relative singular-value thresholding: a singular value counts when
it exceeds ``tol * s_max``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    IllConditionedBasis,
    InverseConditionsViolated,
    NotTransversal,
    ProjectorInvalid,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M)) if np.size(M) else 0.0


@dataclass(frozen=True)
class SubspaceBasis:
    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        b = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @classmethod
    def empty(cls, ambient_dim: int, tol: float = DEFAULT_TOL) -> "SubspaceBasis":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)), tol)

    def concat(self, other: "SubspaceBasis") -> np.ndarray:
        return np.hstack([self.basis, other.basis])


class ProjectorKind(str, enum.Enum):
    orthogonal = "orthogonal"
    oblique = "oblique"


@dataclass(frozen=True)
class Projector:
    matrix: np.ndarray
    kind: ProjectorKind = ProjectorKind.oblique

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ProjectorInvalid(f"projector must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def idempotency_residual(self) -> float:
        P = self.matrix
        return _norm(P @ P - P)

    def symmetry_residual(self) -> float:
        return _norm(self.matrix - self.matrix.T)

    def is_valid(self, tol: float = 1e-10) -> bool:
        scale = 1.0 + _norm(self.matrix) ** 2
        if self.idempotency_residual() > tol * scale:
            return False
        if self.kind is ProjectorKind.orthogonal and self.symmetry_residual() > tol * scale:
            return False
        return True

    def complement(self) -> "Projector":
        return Projector(np.eye(self.dim) - self.matrix, self.kind)


def numerical_rank(M: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = scipy.linalg.svdvals(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def kernel_basis(M: np.ndarray, tol: float = DEFAULT_TOL) -> SubspaceBasis:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[1]
    if M.size == 0 or not np.any(M):
        return SubspaceBasis(n, np.eye(n), tol)
    return SubspaceBasis(n, scipy.linalg.null_space(M, rcond=tol), tol)


def image_basis(M: np.ndarray, tol: float = DEFAULT_TOL) -> SubspaceBasis:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    m = M.shape[0]
    if M.size == 0 or not np.any(M):
        return SubspaceBasis.empty(m, tol)
    return SubspaceBasis(m, scipy.linalg.orth(M, rcond=tol), tol)


def orthogonal_complement(F: SubspaceBasis) -> SubspaceBasis:
    if F.dim == 0:
        return SubspaceBasis(F.ambient_dim, np.eye(F.ambient_dim), F.tol)
    return kernel_basis(F.basis.T, F.tol)


def projector_onto_span(F: SubspaceBasis) -> Projector:
    d = F.ambient_dim
    if F.dim == 0:
        return Projector(np.zeros((d, d)), ProjectorKind.orthogonal)
    FtF = F.basis.T @ F.basis
    cond = np.linalg.cond(FtF)
    if not np.isfinite(cond) or cond > 1.0 / F.tol:
        raise IllConditionedBasis(f"basis Gram matrix has condition number {cond:.3e}")
    Q = F.basis @ scipy.linalg.solve(FtF, F.basis.T, assume_a="pos")
    # symmetrize away rounding
    return Projector(0.5 * (Q + Q.T), ProjectorKind.orthogonal)


def projector_along(N: SubspaceBasis) -> Projector:
    """Orthogonal projector with kernel span(N), i.e. I minus the projector onto N."""
    return projector_onto_span(N).complement()


def oblique_projector(onto: SubspaceBasis, along: SubspaceBasis) -> Projector:
    d = onto.ambient_dim
    if along.ambient_dim != d:
        raise DimensionMismatch(f"ambient dimensions differ: {d} vs {along.ambient_dim}")
    if onto.dim + along.dim != d:
        raise NotTransversal(f"dimensions {onto.dim} + {along.dim} do not add up to {d}")
    if along.dim == 0:
        return Projector(np.eye(d), ProjectorKind.oblique)
    if onto.dim == 0:
        return Projector(np.zeros((d, d)), ProjectorKind.oblique)
    T = onto.concat(along)
    tol = max(onto.tol, along.tol)
    if numerical_rank(T, tol) < d:
        raise NotTransversal("subspaces are not transversal: [U W] is singular")
    Tinv = scipy.linalg.solve(T, np.eye(d))
    return Projector(onto.basis @ Tinv[: onto.dim, :], ProjectorKind.oblique)


def subspace_gap(U: SubspaceBasis, V: SubspaceBasis) -> float:
    """Largest principal angle between span(U) and span(V)."""
    if U.dim != V.dim:
        return float(np.pi / 2)
    if U.dim == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(U.basis, V.basis)))


def contains(U: SubspaceBasis, v: np.ndarray) -> float:
    """Relative distance of v from span(U)."""
    v = np.asarray(v, dtype=float).reshape(-1)
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return 0.0
    if U.dim == 0:
        return 1.0
    coef, *_ = scipy.linalg.lstsq(U.basis, v)
    return float(np.linalg.norm(U.basis @ coef - v)) / nv


@dataclass(frozen=True)
class ProperlyStatedReport:
    passed: bool
    m: int
    dim_ker_A: int
    dim_im_B: int
    transversal: bool
    kernels_agree: bool
    ker_residual: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "m": self.m,
            "dim_ker_A": self.dim_ker_A,
            "dim_im_B": self.dim_im_B,
            "transversal": self.transversal,
            "kernels_agree": self.kernels_agree,
            "ker_residual": self.ker_residual,
        }


def check_properly_stated(A: np.ndarray, B: np.ndarray, tol: float = DEFAULT_TOL) -> ProperlyStatedReport:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n, m = A.shape
    if B.shape != (m, n):
        raise DimensionMismatch(f"A is {n}x{m}, so B must be {m}x{n}; got {B.shape[0]}x{B.shape[1]}")
    kerA = kernel_basis(A, tol)
    imB = image_basis(B, tol)
    transversal = kerA.dim + imB.dim == m and numerical_rank(kerA.concat(imB), tol) == m if m else True

    # ker AB = ker B: same dimension, and each kernel is annihilated by the other matrix
    AB = A @ B
    kerAB = kernel_basis(AB, tol)
    kerB = kernel_basis(B, tol)
    residual = 0.0
    if kerAB.dim:
        residual = max(residual, _norm(B @ kerAB.basis) / (1.0 + _norm(B)))
    if kerB.dim:
        residual = max(residual, _norm(AB @ kerB.basis) / (1.0 + _norm(AB)))
    kernels_agree = kerAB.dim == kerB.dim and residual <= max(tol, 1e-9) * 1e3
    return ProperlyStatedReport(
        passed=bool(transversal and kernels_agree),
        m=m,
        dim_ker_A=kerA.dim,
        dim_im_B=imB.dim,
        transversal=bool(transversal),
        kernels_agree=bool(kernels_agree),
        ker_residual=float(residual),
    )


def inverse_identity_residuals(
    B: np.ndarray, Binv: np.ndarray, P0: np.ndarray, R: np.ndarray
) -> Dict[str, float]:
    """Relative residuals of B B⁻ B = B, B⁻ B B⁻ = B⁻, B⁻ B = P0, B B⁻ = R."""
    scale = 1.0 + _norm(B) * _norm(Binv)
    return {
        "BBinvB=B": _norm(B @ Binv @ B - B) / (scale * (1.0 + _norm(B))),
        "BinvBBinv=Binv": _norm(Binv @ B @ Binv - Binv) / (scale * (1.0 + _norm(Binv))),
        "BinvB=P0": _norm(Binv @ B - P0) / scale,
        "BBinv=R": _norm(B @ Binv - R) / scale,
    }


def one_two_inverse(
    B: np.ndarray,
    P0: Projector,
    R: Projector,
    tol: float = DEFAULT_TOL,
    *,
    check_tol: Optional[float] = None,
) -> np.ndarray:
    B = np.atleast_2d(np.asarray(B, dtype=float))
    m, n = B.shape
    P = P0.matrix
    Rm = R.matrix
    if P.shape != (n, n) or Rm.shape != (m, m):
        raise DimensionMismatch(
            f"B is {m}x{n}: P0 must be {n}x{n} and R {m}x{m}, got {P.shape} and {Rm.shape}"
        )
    check_tol = tol if check_tol is None else check_tol
    Q = np.eye(n) - P
    if numerical_rank(P, tol) != numerical_rank(B, tol) or _norm(B @ Q) > check_tol * (1.0 + _norm(B)):
        raise InverseConditionsViolated("ker P0 differs from ker B")

    stacked = np.vstack([B, Q])
    rhs = np.vstack([Rm, np.zeros((n, m))])
    Binv, *_ = scipy.linalg.lstsq(stacked, rhs)

    residuals = inverse_identity_residuals(B, Binv, P, Rm)
    bad = {k: v for k, v in residuals.items() if v > check_tol}
    if bad:
        raise InverseConditionsViolated(
            "{1,2}-inverse identities violated: " + ", ".join(f"{k}={v:.3e}" for k, v in bad.items()),
            residuals=residuals,
        )
    return Binv
