"""Forward solution of decoupled systems and the direct-recursion oracle."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .decouple import DecoupledSystem, Form, reconstruct
from .errors import DimensionMismatch, InputError, NonRegressiveStep, OracleStepSingular
from .matexpr import TimeVaryingMatrix, zero_vector_function
from .timescale import TimeScale

logger = logging.getLogger(__name__)

STEP_TOL = 1e-12


@dataclass(eq=False)
class Trajectory:
    """Rows are grid points. ``v_sigma[i]`` and ``x_sigma[i]`` hold values at
    σ(t_i) and are NaN on the final row. The oracle leaves ``u`` and
    ``v_sigma`` unset.
    """

    ts: TimeScale
    x0: np.ndarray
    x_sigma: np.ndarray
    u: Optional[np.ndarray] = None
    v_sigma: Optional[np.ndarray] = None
    inv_dist: Optional[np.ndarray] = None
    step_cond: Optional[np.ndarray] = None
    form: Optional[Form] = None
    notes: List[str] = field(default_factory=list)

    def states(self) -> np.ndarray:
        """x at every grid point: x0 first, then x^σ of each predecessor."""
        return np.vstack([self.x0.reshape(1, -1), self.x_sigma[:-1]])

    def max_step_cond(self) -> float:
        if self.step_cond is None:
            return float("nan")
        vals = self.step_cond[np.isfinite(self.step_cond)]
        return float(vals.max()) if vals.size else float("nan")


def _step(ds: DecoupledSystem, u_t: np.ndarray, t: float, tol: float) -> Tuple[np.ndarray, float]:
    point = ds.at(t)
    k = point.Madv.shape[0]
    u_t = np.asarray(u_t, dtype=float).reshape(-1)
    if u_t.size != k:
        raise DimensionMismatch(f"u(t) must have length {k}, got {u_t.size}")
    eye = np.eye(k)
    M = eye - point.mu * point.Madv
    s = scipy.linalg.svdvals(M)
    ratio = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    if ratio <= tol:
        raise NonRegressiveStep(t, ratio)
    rhs = (eye + point.mu * point.Mdet) @ u_t + point.mu * point.g
    return scipy.linalg.solve(M, rhs), 1.0 / ratio


def step_inherent(ds: DecoupledSystem, u_t: np.ndarray, t: float, tol: float = STEP_TOL) -> np.ndarray:
    """Solve (I - μ Madv) u^σ = (I + μ Mdet) u + μ g at a right-scattered point."""
    return _step(ds, u_t, t, tol)[0]


def solve(
    ds: DecoupledSystem,
    x0: np.ndarray,
    t0: Optional[float] = None,
    tol: float = STEP_TOL,
    *,
    u0: Optional[np.ndarray] = None,
) -> Trajectory:
    ts = ds.timescale
    if t0 is not None and ts.index_of(t0) != 0:
        raise InputError(f"t0={t0!r} must be the first grid point {ts.first!r}", t=t0)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = ds.state_dim
    if x0.size != n:
        raise DimensionMismatch(f"x0 must have length {n}, got {x0.size}")
    N = len(ts)
    k = ds.inherent_dim

    u = np.full((N, k), np.nan)
    v_sigma = np.full((N, n), np.nan)
    x_sigma = np.full((N, n), np.nan)
    inv_dist = np.zeros(N)
    step_cond = np.full(N, np.nan)
    notes: List[str] = []

    u[0] = ds.initial_map @ x0 if u0 is None else np.asarray(u0, dtype=float).reshape(-1)
    if u0 is None:
        kept = ds.chain[0].Binv @ u[0] if ds.form is Form.proper and ds.chain else u[0]
        dropped = float(np.linalg.norm(x0 - kept))
        if dropped > 1e-12 * (1.0 + float(np.linalg.norm(x0))):
            notes.append(
                f"Q0-component of x0 (norm {dropped:.3e}) discarded; "
                "only the dynamic part of x0 enters the solution"
            )

    for i, point in enumerate(ds.points):
        W = ds.invariant_maps[i]
        inv_dist[i] = float(np.linalg.norm(u[i] - W @ u[i]))
        u[i + 1], step_cond[i] = _step(ds, u[i], point.t, tol)
        v_sigma[i] = point.Valg @ u[i + 1] + point.Vf @ point.f
        x_sigma[i] = reconstruct(ds, u[i + 1], v_sigma[i], point.t)
    W = ds.invariant_maps[N - 1]
    inv_dist[N - 1] = float(np.linalg.norm(u[N - 1] - W @ u[N - 1]))

    logger.info(f"solve form={ds.form.value} points={N} max_step_cond={np.nanmax(step_cond) if N > 1 else 0:.3e}")
    return Trajectory(
        ts=ts, x0=x0, x_sigma=x_sigma, u=u, v_sigma=v_sigma, inv_dist=inv_dist,
        step_cond=step_cond, form=ds.form, notes=notes,
    )


def direct_recursion_oracle(
    A: TimeVaryingMatrix,
    B: TimeVaryingMatrix,
    C: TimeVaryingMatrix,
    f: Optional[TimeVaryingMatrix],
    ts: TimeScale,
    x0: np.ndarray,
    tol: float = STEP_TOL,
) -> Trajectory:
    """x^σ = (A^σ B^σ - μ C^σ)⁻¹ (A^σ B x + μ f), no projectors involved."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = C.shape[0]
    if x0.size != n:
        raise DimensionMismatch(f"x0 must have length {n}, got {x0.size}")
    f = f if f is not None else zero_vector_function(n)
    pts = [float(t) for t in ts.points]
    x_sigma = np.full((len(pts), n), np.nan)
    x = x0
    for i in range(len(pts) - 1):
        t, s = pts[i], pts[i + 1]
        mu = s - t
        As = A.evaluate(s)
        M = As @ B.evaluate(s) - mu * C.evaluate(s)
        sv = scipy.linalg.svdvals(M)
        ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        if ratio <= tol:
            raise OracleStepSingular(t, ratio)
        rhs = As @ B.evaluate(t) @ x + mu * np.asarray(f.evaluate(t), dtype=float).reshape(-1)
        x = scipy.linalg.solve(M, rhs)
        x_sigma[i] = x
    return Trajectory(ts=ts, x0=x0, x_sigma=x_sigma)


@dataclass(frozen=True)
class InvarianceReport:
    ratios: List[float]
    flagged: List[float]
    tol: float

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    @property
    def passed(self) -> bool:
        return not self.flagged


def invariance_check(traj: Trajectory, ds: DecoupledSystem, tol: float = 1e-8) -> InvarianceReport:
    """dist(u(t), im W(t)) / (1 + ‖u(t)‖) at every grid point, W = B P0 B⁻ (or P)."""
    if traj.u is None:
        raise InputError("invariance needs a decoupled trajectory")
    ratios: List[float] = []
    flagged: List[float] = []
    for t, ut, W in zip(traj.ts.points, traj.u, ds.invariant_maps):
        dist = float(np.linalg.norm(ut - W @ ut))
        ratio = dist / (1.0 + float(np.linalg.norm(ut)))
        ratios.append(ratio)
        if ratio > tol:
            flagged.append(float(t))
    return InvarianceReport(ratios=ratios, flagged=flagged, tol=tol)


def relative_gap(x: np.ndarray, reference: np.ndarray) -> float:
    """max over rows of ‖x - ref‖ / (1 + ‖ref‖), skipping undefined rows."""
    worst = 0.0
    for a, b in zip(np.asarray(x), np.asarray(reference)):
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            continue
        worst = max(worst, float(np.linalg.norm(a - b)) / (1.0 + float(np.linalg.norm(b))))
    return worst


def homogeneity_gap(ds_f: DecoupledSystem, ds_2f: DecoupledSystem, x0: np.ndarray, tol: float = STEP_TOL) -> float:
    """Deviation between solve(2f, 2x0) and 2 solve(f, x0)."""
    x0 = np.asarray(x0, dtype=float)
    one = solve(ds_f, x0, tol=tol)
    two = solve(ds_2f, 2.0 * x0, tol=tol)
    return relative_gap(two.x_sigma, 2.0 * one.x_sigma)
