"""Decoupling into an inherent dynamic equation plus an algebraic constraint.

Both forms produce, at every non-final grid point t (σ-quantities taken at
the next grid point)::

    u^Δ(t) = Mdet(t) u(t) + Madv(t) u^σ(t) + g(t),      g = Gf f(t)
    v^σ(t) = Valg(t) u^σ(t) + Vf(t) f(t)

Proper form (A^σ (Bx)^Δ = C^σ x^σ + f), with W = B P0 B⁻:
    Mdet = W^Δ,  Gf = B^σ P0^σ (G1⁻¹)^σ,  Madv = Gf C^σ B^{-σ},
    Valg = -Q0^σ (G1⁻¹)^σ C^σ B^{-σ},  Vf = -Q0^σ (G1⁻¹)^σ,  x^σ = B^{-σ} u^σ + v^σ.

Standard form (A^σ (Px)^Δ = C^σ x^σ + f), with A1 = A + C Q:
    Mdet = P^Δ,  Gf = P^σ (A1⁻¹)^σ,  Madv = Gf C^σ,
    Valg = -Q^σ (A1⁻¹)^σ C^σ,  Vf = -Q^σ (A1⁻¹)^σ,  x^σ = u^σ + v^σ.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg

from .chain import CHECK_TOL, ChainPoint, IndexFlag, build_chain
from .errors import (
    ConsistencyWarning,
    DimensionMismatch,
    InsufficientTrajectory,
    LastPointUndefined,
    NotIndexOne,
    ProjectorInvalid,
    RankDrift,
)
from .matexpr import (
    SampledMatrixFunction,
    TimeVaryingMatrix,
    zero_vector_function,
)
from .projalg import (
    DEFAULT_TOL,
    Projector,
    inverse_identity_residuals,
    kernel_basis,
    numerical_rank,
    projector_along,
    subspace_gap,
)
from .timescale import GridMatrixSamples, TimeScale

logger = logging.getLogger(__name__)


class Form(str, enum.Enum):
    proper = "proper"
    standard = "standard"


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M)) if np.size(M) else 0.0


def _vec(f: TimeVaryingMatrix, t: float) -> np.ndarray:
    return np.asarray(f.evaluate(t), dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class DecoupledPoint:
    t: float
    mu: float
    Mdet: np.ndarray
    Madv: np.ndarray
    Gf: np.ndarray
    g: np.ndarray
    f: np.ndarray
    Valg: np.ndarray
    Vf: np.ndarray
    Binv_sigma: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class StandardFormData:
    P: List[np.ndarray]
    Q: List[np.ndarray]
    A1: List[np.ndarray]
    A1inv: List[Optional[np.ndarray]]


@dataclass(eq=False)
class DecoupledSystem:
    form: Form
    timescale: TimeScale
    points: List[DecoupledPoint]
    # per grid point: the projector whose image holds u, and the map x0 -> u(t0)
    invariant_maps: List[np.ndarray]
    initial_map: np.ndarray
    warnings: List[ConsistencyWarning] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)
    chain: Optional[List[ChainPoint]] = None
    standard: Optional[StandardFormData] = None

    @property
    def state_dim(self) -> int:
        return int(self.initial_map.shape[1])

    @property
    def inherent_dim(self) -> int:
        return int(self.initial_map.shape[0])

    def at(self, t: float) -> DecoupledPoint:
        i = self.timescale.index_of(t)
        if i >= len(self.points):
            raise LastPointUndefined(t)
        return self.points[i]

    def record(self, name: str, value: float) -> None:
        self.residuals[name] = max(self.residuals.get(name, 0.0), float(value))


def _warn(ds_warnings: List[ConsistencyWarning], w: ConsistencyWarning) -> None:
    logger.warning(f"{w.check}: {w.message}")
    ds_warnings.append(w)


# --- proper form -------------------------------------------------------------


def build_proper(
    A: TimeVaryingMatrix,
    B: TimeVaryingMatrix,
    C: TimeVaryingMatrix,
    f: Optional[TimeVaryingMatrix],
    ts: TimeScale,
    tol: float = DEFAULT_TOL,
    *,
    check_tol: float = CHECK_TOL,
    chain: Optional[List[ChainPoint]] = None,
) -> DecoupledSystem:
    if chain is None:
        chain = build_chain(A, B, C, ts, tol, check_tol=check_tol)
    n = chain[0].n
    f = f if f is not None else zero_vector_function(n)
    if tuple(f.shape) != (n, 1):
        raise DimensionMismatch(f"f must be a vector of length {n}, got shape {f.shape}")
    if chain[0].index_flag is IndexFlag.not_index_le_1:
        raise NotIndexOne(f"G1 is singular (rank {chain[0].r1} < {n})", t=chain[0].t)

    W = [cp.invariant_map for cp in chain]
    ds = DecoupledSystem(
        form=Form.proper,
        timescale=ts,
        points=[],
        invariant_maps=W,
        initial_map=chain[0].B @ chain[0].P0.matrix,
        chain=chain,
    )
    for cp in chain:
        for name, value in cp.residuals().items():
            ds.record(name, value)
        for name, value in inverse_identity_residuals(cp.B, cp.Binv, cp.P0.matrix, cp.R.matrix).items():
            ds.record(name, value)

    for i in range(len(chain) - 1):
        cp, cs = chain[i], chain[i + 1]
        mu = cs.t - cp.t
        G1inv_s = cs.G1inv
        assert G1inv_s is not None
        P0s, Q0s = cs.P0.matrix, cs.Q0.matrix
        Gf = cs.B @ P0s @ G1inv_s
        Madv = Gf @ cs.C @ cs.Binv
        fi = _vec(f, cp.t)
        point = DecoupledPoint(
            t=cp.t,
            mu=mu,
            Mdet=(W[i + 1] - W[i]) / mu,
            Madv=Madv,
            Gf=Gf,
            g=Gf @ fi,
            f=fi,
            Valg=-Q0s @ G1inv_s @ cs.C @ cs.Binv,
            Vf=-Q0s @ G1inv_s,
            Binv_sigma=cs.Binv,
        )
        ds.points.append(point)
        direct = cs.B @ (P0s @ (G1inv_s @ (cs.C @ cs.Binv)))
        ds.record("Madv assembly", _norm(Madv - direct) / (1.0 + _norm(direct)))
        ds.record("BP0G1invCQ0=0", _norm(Gf @ cs.C @ Q0s) / (1.0 + _norm(Gf) * _norm(cs.C)))

    logger.info(f"build_proper points={len(chain)} n={n} m={chain[0].m} flag={chain[0].index_flag.value}")
    return ds


# --- standard form -----------------------------------------------------------


def _entry_warning(
    check: str,
    label: str,
    diffs: np.ndarray,
    points: List[float],
    tol: float,
) -> Optional[ConsistencyWarning]:
    """Largest entry of a stack of difference matrices, if any exceeds tol."""
    if diffs.size == 0:
        return None
    mags = np.abs(diffs)
    k, i, j = np.unravel_index(int(np.argmax(mags)), mags.shape)
    if mags[k, i, j] <= tol:
        return None
    values = [float(d[i, j]) for d in diffs]
    bad = [t for t, v in zip(points, values) if abs(v) > tol]
    return ConsistencyWarning(
        check,
        f"{label} at entry ({i + 1},{j + 1}), residual {values[k]:.6g} at t={points[k]:g} "
        f"(nonzero at {len(bad)} of {len(points)} points)",
        points=bad,
        entry=(int(i) + 1, int(j) + 1),
        values=values,
    )


def build_standard(
    A: TimeVaryingMatrix,
    C: TimeVaryingMatrix,
    P: Optional[TimeVaryingMatrix],
    f: Optional[TimeVaryingMatrix],
    ts: TimeScale,
    tol: float = DEFAULT_TOL,
    *,
    check_tol: float = CHECK_TOL,
) -> DecoupledSystem:
    n, m = A.shape
    if n != m:
        raise DimensionMismatch(f"standard form needs a square A, got {n}x{m}")
    if tuple(C.shape) != (n, n):
        raise DimensionMismatch(f"C must be {n}x{n}, got {C.shape}")
    if P is not None and tuple(P.shape) != (n, n):
        raise DimensionMismatch(f"P must be {n}x{n}, got {P.shape}")
    f = f if f is not None else zero_vector_function(n)
    if tuple(f.shape) != (n, 1):
        raise DimensionMismatch(f"f must be a vector of length {n}, got shape {f.shape}")

    pts = [float(t) for t in ts.points]
    As = [A.evaluate(t) for t in pts]
    Cs = [C.evaluate(t) for t in pts]
    if P is None:
        Ps = [projector_along(kernel_basis(Ai, tol)).matrix for Ai in As]
    else:
        Ps = [P.evaluate(t) for t in pts]
    eye = np.eye(n)
    for t, Pi in zip(pts, Ps):
        proj = Projector(Pi)
        if not proj.is_valid(max(check_tol, 1e-10)):
            raise ProjectorInvalid(f"P(t) is not idempotent at t={t!r}: |P^2 - P| = {proj.idempotency_residual():.3e}", t=t)
    Qs = [eye - Pi for Pi in Ps]
    A1 = [Ai + Ci @ Qi for Ai, Ci, Qi in zip(As, Cs, Qs)]
    A1inv: List[Optional[np.ndarray]] = []
    for i, (t, M) in enumerate(zip(pts, A1)):
        if numerical_rank(M, tol) == n:
            A1inv.append(scipy.linalg.solve(M, eye))
        else:
            if i > 0:
                raise NotIndexOne(f"A1 = A + CQ is singular at t={t!r}", t=t)
            A1inv.append(None)

    ds = DecoupledSystem(
        form=Form.standard,
        timescale=ts,
        points=[],
        invariant_maps=list(Ps),
        initial_map=Ps[0],
        standard=StandardFormData(P=Ps, Q=Qs, A1=A1, A1inv=A1inv),
    )

    # hypotheses: A P = A and ker P = ker A
    scale = max(1.0, max(_norm(Ai) for Ai in As))
    w = _entry_warning("AP=A", "A·P ≠ A", np.stack([Ai @ Pi - Ai for Ai, Pi in zip(As, Ps)]), pts, check_tol * scale)
    if w is not None:
        _warn(ds.warnings, w)
    gaps = [subspace_gap(kernel_basis(Pi, tol), kernel_basis(Ai, tol)) for Ai, Pi in zip(As, Ps)]
    bad = [t for t, gap in zip(pts, gaps) if gap > check_tol]
    if bad:
        _warn(
            ds.warnings,
            ConsistencyWarning(
                "kerP=kerA",
                f"ker P ≠ ker A at {len(bad)} of {len(pts)} points (largest principal angle {max(gaps):.3e})",
                points=bad,
                values=gaps,
            ),
        )
    ds.record("AP=A", max(_norm(Ai @ Pi - Ai) / (1.0 + _norm(Ai)) for Ai, Pi in zip(As, Ps)))
    ds.record("kerP=kerA", max(gaps))

    # A1⁻¹A = P and A1⁻¹CQ = Q
    inv_bad: List[float] = []
    inv_vals: List[float] = []
    for t, Ai, Ci, Pi, Qi, inv in zip(pts, As, Cs, Ps, Qs, A1inv):
        if inv is None:
            continue
        r1 = _norm(inv @ Ai - Pi) / (1.0 + _norm(Pi))
        r2 = _norm(inv @ Ci @ Qi - Qi) / (1.0 + _norm(Qi))
        ds.record("A1invA=P", r1)
        ds.record("A1invCQ=Q", r2)
        inv_vals.append(max(r1, r2))
        if max(r1, r2) > check_tol:
            inv_bad.append(t)
    if inv_bad:
        _warn(
            ds.warnings,
            ConsistencyWarning(
                "A1inv-identities",
                f"A1⁻¹A = P or A1⁻¹CQ = Q fails at {len(inv_bad)} of {len(pts)} points "
                f"(largest residual {max(inv_vals):.3e}); the decoupled system is not equivalent to the equation",
                points=inv_bad,
                values=inv_vals,
            ),
        )
    ds.record("P^2=P", max(Projector(Pi).idempotency_residual() for Pi in Ps))

    for i in range(len(pts) - 1):
        mu = pts[i + 1] - pts[i]
        inv_s = A1inv[i + 1]
        assert inv_s is not None
        Gf = Ps[i + 1] @ inv_s
        fi = _vec(f, pts[i])
        ds.points.append(
            DecoupledPoint(
                t=pts[i],
                mu=mu,
                Mdet=(Ps[i + 1] - Ps[i]) / mu,
                Madv=Gf @ Cs[i + 1],
                Gf=Gf,
                g=Gf @ fi,
                f=fi,
                Valg=-Qs[i + 1] @ inv_s @ Cs[i + 1],
                Vf=-Qs[i + 1] @ inv_s,
            )
        )
    logger.info(f"build_standard points={len(pts)} n={n} warnings={len(ds.warnings)}")
    return ds


# --- unbound derivative ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """A^σ (Px)^Δ = C1^σ x^σ + f, equivalent to A^σ x^Δ = C^σ x^σ + f."""

    A: TimeVaryingMatrix
    P: SampledMatrixFunction
    C1: SampledMatrixFunction
    f: Optional[TimeVaryingMatrix]


def reduce_unbound(
    A: TimeVaryingMatrix,
    C: TimeVaryingMatrix,
    f: Optional[TimeVaryingMatrix],
    ts: TimeScale,
    tol: float = DEFAULT_TOL,
    P: Optional[TimeVaryingMatrix] = None,
) -> ReducedProblem:
    """C1(σ(t)) = A(σ(t)) P^Δ(t) + C(σ(t)), with P(t) a projector along ker A(σ(t))."""
    n, m = A.shape
    if n != m or tuple(C.shape) != (n, n):
        raise DimensionMismatch(f"unbound form needs square A and C, got {A.shape} and {C.shape}")
    pts = [float(t) for t in ts.points]
    As = [A.evaluate(t) for t in pts]
    kernels = [kernel_basis(Ai, tol) for Ai in As]
    for t, K in zip(pts[1:], kernels[1:]):
        if K.dim != kernels[0].dim:
            raise RankDrift("dim ker A", pts[0], t, kernels[0].dim, K.dim)
    if P is None:
        Ps = [projector_along(kernels[min(i + 1, len(pts) - 1)]).matrix for i in range(len(pts))]
    else:
        Ps = [P.evaluate(t) for t in pts]
    C1 = [C.evaluate(pts[0])]
    for i in range(len(pts) - 1):
        mu = pts[i + 1] - pts[i]
        C1.append(As[i + 1] @ (Ps[i + 1] - Ps[i]) / mu + C.evaluate(pts[i + 1]))
    return ReducedProblem(
        A=A,
        P=SampledMatrixFunction(GridMatrixSamples(ts, np.stack(Ps))),
        C1=SampledMatrixFunction(GridMatrixSamples(ts, np.stack(C1))),
        f=f,
    )


def build_unbound(
    A: TimeVaryingMatrix,
    C: TimeVaryingMatrix,
    f: Optional[TimeVaryingMatrix],
    ts: TimeScale,
    tol: float = DEFAULT_TOL,
    P: Optional[TimeVaryingMatrix] = None,
    *,
    check_tol: float = CHECK_TOL,
) -> DecoupledSystem:
    red = reduce_unbound(A, C, f, ts, tol, P)
    return build_standard(red.A, red.C1, red.P, red.f, ts, tol, check_tol=check_tol)


# --- reconstruction / residual -----------------------------------------------


def reconstruct(ds: DecoupledSystem, u_sigma: np.ndarray, v_sigma: np.ndarray, t: float) -> np.ndarray:
    point = ds.at(t)
    u = np.asarray(u_sigma, dtype=float).reshape(-1)
    v = np.asarray(v_sigma, dtype=float).reshape(-1)
    n = ds.state_dim
    if v.size != n:
        raise DimensionMismatch(f"v^σ must have length {n}, got {v.size}")
    if ds.form is Form.proper:
        assert point.Binv_sigma is not None
        if u.size != point.Binv_sigma.shape[1]:
            raise DimensionMismatch(f"u^σ must have length {point.Binv_sigma.shape[1]}, got {u.size}")
        return point.Binv_sigma @ u + v
    if u.size != n:
        raise DimensionMismatch(f"u^σ must have length {n}, got {u.size}")
    return u + v


def reversibility_residual(
    A: TimeVaryingMatrix,
    B: TimeVaryingMatrix,
    C: TimeVaryingMatrix,
    f: Optional[TimeVaryingMatrix],
    x_trajectory: np.ndarray,
    ts: TimeScale,
) -> float:
    """max ‖A^σ (Bx)^Δ - C^σ x^σ - f‖ / (1 + ‖f‖) over consecutive defined states.

    ``x_trajectory`` holds one state per grid point (NaN rows are skipped).
    """
    X = np.asarray(x_trajectory, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(ts):
        raise InsufficientTrajectory(f"need one state per grid point ({len(ts)}), got shape {X.shape}")
    n = X.shape[1]
    f = f if f is not None else zero_vector_function(n)
    pts = [float(t) for t in ts.points]
    worst = None
    for i in range(len(pts) - 1):
        x, xs = X[i], X[i + 1]
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xs))):
            continue
        t, ts_ = pts[i], pts[i + 1]
        mu = ts_ - t
        fi = _vec(f, t)
        d = (B.evaluate(ts_) @ xs - B.evaluate(t) @ x) / mu
        res = A.evaluate(ts_) @ d - C.evaluate(ts_) @ xs - fi
        value = float(np.linalg.norm(res)) / (1.0 + float(np.linalg.norm(fi)))
        worst = value if worst is None else max(worst, value)
    if worst is None:
        raise InsufficientTrajectory("no two consecutive defined states")
    return worst
