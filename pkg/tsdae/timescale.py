"""Finite discrete time scales and the delta calculus of grid functions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
import scipy.linalg

from .errors import InputError, LastPointUndefined, NonSquare, NotAGridPoint


class GeneratorTag(str, enum.Enum):
    integer_range = "integer-range"
    geometric = "geometric"
    uniform = "uniform"
    explicit = "explicit"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeScale:
    points: np.ndarray
    generator_tag: GeneratorTag = GeneratorTag.explicit
    _index: Dict[float, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        pts = _frozen(np.asarray(self.points, dtype=float).reshape(-1))
        if pts.size == 0:
            raise InputError("time scale needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InputError("time scale points must be finite")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise InputError("time scale points must be strictly increasing")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_index", {float(p): i for i, p in enumerate(pts)})

    # constructors -----------------------------------------------------------

    @classmethod
    def integer_range(cls, start: int, end: int) -> "TimeScale":
        if end < start:
            raise InputError(f"integer-range needs end >= start, got {start}..{end}")
        return cls(np.arange(int(start), int(end) + 1, dtype=float), GeneratorTag.integer_range)

    @classmethod
    def geometric(cls, base: float, start: float, count: int) -> "TimeScale":
        if base <= 1:
            raise InputError(f"geometric base must be > 1, got {base}")
        if start <= 0:
            raise InputError(f"geometric start must be > 0, got {start}")
        if count < 1:
            raise InputError(f"geometric count must be >= 1, got {count}")
        pts = [float(start) * float(base) ** k for k in range(int(count))]
        return cls(np.array(pts), GeneratorTag.geometric)

    @classmethod
    def uniform(cls, a: float, b: float, points: int) -> "TimeScale":
        if points < 2:
            raise InputError(f"uniform grid needs at least 2 points, got {points}")
        if not b > a:
            raise InputError(f"uniform grid needs b > a, got [{a}, {b}]")
        return cls(np.linspace(float(a), float(b), int(points)), GeneratorTag.uniform)

    @classmethod
    def explicit(cls, points: Sequence[float]) -> "TimeScale":
        return cls(np.asarray(points, dtype=float), GeneratorTag.explicit)

    # structure --------------------------------------------------------------

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def first(self) -> float:
        return float(self.points[0])

    @property
    def last(self) -> float:
        return float(self.points[-1])

    def index_of(self, t: float) -> int:
        try:
            return self._index[float(t)]
        except (KeyError, TypeError, ValueError):
            raise NotAGridPoint(t) from None

    def point(self, i: int) -> float:
        return float(self.points[i])

    def is_last(self, t: float) -> bool:
        return self.index_of(t) == len(self) - 1

    def sigma(self, t: float) -> float:
        i = self.index_of(t)
        return float(self.points[min(i + 1, len(self) - 1)])

    def graininess(self, t: float) -> float:
        return self.sigma(t) - float(t)

    def graininess_array(self) -> np.ndarray:
        """mu at every point, 0 at the final one."""
        return np.append(np.diff(self.points), 0.0)

    def non_final(self) -> List[float]:
        return [float(p) for p in self.points[:-1]]


def sigma(ts: TimeScale, t: float) -> float:
    return ts.sigma(t)


def graininess(ts: TimeScale, t: float) -> float:
    return ts.graininess(t)


@dataclass(frozen=True, eq=False)
class GridMatrixSamples:
    """One matrix per grid point, all of the same shape. ``values`` is (N, rows, cols)."""

    timescale: TimeScale
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 3:
            raise InputError(f"grid samples must be a stack of matrices, got ndim={vals.ndim}")
        if vals.shape[0] != len(self.timescale):
            raise InputError(
                f"grid samples hold {vals.shape[0]} matrices for {len(self.timescale)} grid points"
            )
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def shape(self) -> tuple:
        return tuple(self.values.shape[1:])

    def at(self, t: float) -> np.ndarray:
        return self.values[self.timescale.index_of(t)]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.values[i]

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def map(self, fn) -> "GridMatrixSamples":
        return GridMatrixSamples(self.timescale, np.stack([fn(v) for v in self.values]))


def delta_derivative(samples: GridMatrixSamples, t: float) -> np.ndarray:
    ts = samples.timescale
    i = ts.index_of(t)
    if i == len(ts) - 1:
        raise LastPointUndefined(t)
    mu = ts.point(i + 1) - ts.point(i)
    return (samples.values[i + 1] - samples.values[i]) / mu


def delta_derivative_all(samples: GridMatrixSamples) -> np.ndarray:
    """(N-1, r, c) stack of delta derivatives at the non-final points."""
    mu = np.diff(samples.timescale.points)
    return np.diff(samples.values, axis=0) / mu[:, None, None]


def sigma_shift(samples: GridMatrixSamples) -> np.ndarray:
    """F(sigma(t)) at every non-final point, as a (N-1, r, c) stack."""
    return samples.values[1:]


@dataclass(frozen=True)
class RegressivityReport:
    points: List[float]
    passed: List[bool]
    smin: List[float]
    eigen_margin: List[float]

    @property
    def ok(self) -> bool:
        return all(self.passed)

    @property
    def failing_points(self) -> List[float]:
        return [t for t, p in zip(self.points, self.passed) if not p]


def check_regressive(samples: GridMatrixSamples, tol: float) -> RegressivityReport:
    """Test E + mu(t) M(t) for invertibility at every non-final point.

    A point passes when the smallest singular value exceeds ``tol``. The
    eigenvalue margin min |1 + mu*lambda| is reported next to it; a matrix is
    regressive exactly when all its eigenvalues are.
    """
    r, c = samples.shape
    if r != c:
        raise NonSquare(f"regressivity needs square matrices, got {r}x{c}")
    ts = samples.timescale
    eye = np.eye(r)
    points: List[float] = []
    passed: List[bool] = []
    smin: List[float] = []
    margin: List[float] = []
    for i in range(len(ts) - 1):
        mu = ts.point(i + 1) - ts.point(i)
        M = samples.values[i]
        s = scipy.linalg.svdvals(eye + mu * M)
        lam = scipy.linalg.eigvals(M)
        points.append(ts.point(i))
        smin.append(float(s[-1]))
        margin.append(float(np.min(np.abs(1.0 + mu * lam))))
        passed.append(bool(s[-1] > tol))
    return RegressivityReport(points, passed, smin, margin)
