from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import ValidationError

from .errors import DimensionMismatch, InputError, ParseError, SchemaError
from .matexpr import MatrixFunction, TimeVaryingMatrix, identity_function
from .schemas import Explicit, Geometric, IntegerRange, ProblemFile, Tolerances, Uniform
from .timescale import TimeScale

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    form: str  # proper-stated | standard | unbound-derivative
    ts: TimeScale
    n: int
    m: int
    A: MatrixFunction
    C: MatrixFunction
    f: MatrixFunction
    B: Optional[MatrixFunction]
    P: Optional[MatrixFunction]
    t0: Optional[float]
    x0: Optional[np.ndarray]
    tolerances: Tolerances
    description: Optional[str] = None
    path: Optional[str] = None

    @property
    def has_initial(self) -> bool:
        return self.x0 is not None

    def original_B(self) -> TimeVaryingMatrix:
        """Leading-term B of the equation as posed: B itself, P for the
        standard form (when given) and the identity for the unbound form."""
        if self.form == "proper-stated":
            assert self.B is not None
            return self.B
        if self.form == "standard" and self.P is not None:
            return self.P
        return identity_function(self.n)


def build_timescale(spec: Union[IntegerRange, Geometric, Uniform, Explicit]) -> TimeScale:
    if isinstance(spec, IntegerRange):
        return TimeScale.integer_range(spec.start, spec.end)
    if isinstance(spec, Geometric):
        return TimeScale.geometric(spec.base, spec.start, spec.count)
    if isinstance(spec, Uniform):
        return TimeScale.uniform(spec.a, spec.b, spec.points)
    return TimeScale.explicit(spec.points)


def _schema_error(exc: ValidationError) -> SchemaError:
    locations: List[str] = []
    parts: List[str] = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err.get("loc", ()))
        locations.append(loc)
        parts.append(f"{loc or '<root>'}: {err.get('msg')}")
    return SchemaError("invalid problem file: " + "; ".join(parts), locations=locations)


def _check_shape(name: str, mf: MatrixFunction, rows: int, cols: int) -> None:
    if mf.shape != (rows, cols):
        raise DimensionMismatch(f"{name} is {mf.rows}x{mf.cols}, expected {rows}x{cols}")


def parse_problem(doc: Dict[str, Any], *, path: Optional[str] = None,
                  tol_overrides: Optional[Dict[str, float]] = None) -> ProblemSpec:
    try:
        pf = ProblemFile.model_validate(doc)
    except ValidationError as exc:
        raise _schema_error(exc) from None

    ts = build_timescale(pf.timescale)
    n, m = pf.dimensions.n, pf.dimensions.m
    A = MatrixFunction.from_sources(pf.A, name="A")
    C = MatrixFunction.from_sources(pf.C, name="C")
    f = MatrixFunction.from_vector_sources(pf.f, name="f")
    B = MatrixFunction.from_sources(pf.B, name="B") if pf.B is not None else None
    P = MatrixFunction.from_sources(pf.P, name="P") if pf.P is not None else None
    _check_shape("A", A, n, m)
    _check_shape("C", C, n, n)
    _check_shape("f", f, n, 1)
    if B is not None:
        _check_shape("B", B, m, n)
    if P is not None:
        _check_shape("P", P, n, n)

    t0: Optional[float] = None
    x0: Optional[np.ndarray] = None
    if pf.initial is not None:
        if pf.initial.t0_index is not None:
            if pf.initial.t0_index >= len(ts):
                raise InputError(f"t0_index {pf.initial.t0_index} is outside the grid of {len(ts)} points")
            t0 = ts.point(pf.initial.t0_index)
        else:
            t0 = float(pf.initial.t0)  # type: ignore[arg-type]
            ts.index_of(t0)
        if t0 != ts.first:
            raise InputError(f"t0={t0!r} must be the first grid point {ts.first!r}", t=t0)
        if len(pf.initial.x0) != n:
            raise DimensionMismatch(f"x0 has length {len(pf.initial.x0)}, expected {n}")
        x0 = np.asarray(pf.initial.x0, dtype=float)

    tolerances = Tolerances().merged(pf.tolerances).merged(tol_overrides)
    spec = ProblemSpec(
        form=pf.form, ts=ts, n=n, m=m, A=A, C=C, f=f, B=B, P=P, t0=t0, x0=x0,
        tolerances=tolerances, description=pf.description, path=path,
    )
    logger.info(f"load_problem form={spec.form} n={n} m={m} points={len(ts)} path={path}")
    return spec


def load_problem(path: Union[str, Path], tol_overrides: Optional[Dict[str, float]] = None) -> ProblemSpec:
    """Read, validate and compile a JSON problem file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"problem file not found: {p}") from None
    except OSError as exc:
        raise InputError(f"cannot read problem file {p}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON: {exc.msg}",
            offset=len(text[: exc.pos].encode("utf-8")),
            location=f"{p.name} line {exc.lineno} column {exc.colno}",
        ) from None
    if not isinstance(doc, dict):
        raise SchemaError("problem file must hold a JSON object")
    return parse_problem(doc, path=str(p), tol_overrides=tol_overrides)

