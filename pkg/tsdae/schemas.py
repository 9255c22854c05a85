from __future__ import annotations

from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .settings import settings


Entry = Union[str, float, int]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# --- problem file ------------------------------------------------------------


class IntegerRange(_Strict):
    kind: Literal["integer-range"]
    start: int
    end: int


class Geometric(_Strict):
    kind: Literal["geometric"]
    base: float = Field(gt=1)
    start: float = Field(gt=0)
    count: int = Field(ge=1)


class Uniform(_Strict):
    kind: Literal["uniform"]
    a: float
    b: float
    points: int = Field(ge=2)


class Explicit(_Strict):
    kind: Literal["explicit"]
    points: List[float] = Field(min_length=1)


TimeScaleSpec = Annotated[Union[IntegerRange, Geometric, Uniform, Explicit], Field(discriminator="kind")]


class Dimensions(_Strict):
    n: int = Field(ge=1)
    m: int = Field(ge=1)


class InitialData(_Strict):
    t0: Optional[float] = None
    t0_index: Optional[int] = Field(default=None, ge=0)
    x0: List[float]

    @model_validator(mode="after")
    def _one_start(self) -> "InitialData":
        if (self.t0 is None) == (self.t0_index is None):
            raise ValueError("initial needs exactly one of t0 or t0_index")
        return self


class ToleranceOverrides(_Strict):
    rank: Optional[float] = Field(default=None, gt=0)
    residual: Optional[float] = Field(default=None, gt=0)
    invariance: Optional[float] = Field(default=None, gt=0)
    step: Optional[float] = Field(default=None, gt=0)


class Tolerances(_Strict):
    rank: float = Field(default_factory=lambda: settings.rank_tol, gt=0)
    residual: float = Field(default_factory=lambda: settings.residual_tol, gt=0)
    invariance: float = Field(default_factory=lambda: settings.invariance_tol, gt=0)
    step: float = Field(default_factory=lambda: settings.step_tol, gt=0)

    def merged(self, overrides: Optional[Union[ToleranceOverrides, Dict[str, float]]]) -> "Tolerances":
        if overrides is None:
            return self
        if isinstance(overrides, ToleranceOverrides):
            overrides = overrides.model_dump(exclude_none=True)
        return self.model_copy(update={k: float(v) for k, v in overrides.items() if v is not None})


Form = Literal["proper-stated", "standard", "unbound-derivative"]


class ProblemFile(_Strict):
    form: Form
    description: Optional[str] = None
    timescale: TimeScaleSpec
    dimensions: Dimensions
    A: List[List[Entry]]
    B: Optional[List[List[Entry]]] = None
    C: List[List[Entry]]
    f: List[Entry]
    P: Optional[List[List[Entry]]] = None
    initial: Optional[InitialData] = None
    tolerances: Optional[ToleranceOverrides] = None

    @model_validator(mode="after")
    def _form_rules(self) -> "ProblemFile":
        if self.form == "proper-stated":
            if self.B is None:
                raise ValueError("form 'proper-stated' requires B")
            if self.P is not None:
                raise ValueError("form 'proper-stated' does not take P")
        else:
            if self.B is not None:
                raise ValueError(f"form '{self.form}' must not declare B")
            if self.dimensions.m != self.dimensions.n:
                raise ValueError(f"form '{self.form}' requires m = n")
        return self


# --- report ------------------------------------------------------------------


class ChainPointSummary(BaseModel):
    t: float
    r: int
    r1: int
    index_flag: str
    det_G1: Optional[float] = None
    cond_G1: Optional[float] = None


class CheckResult(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


class WarningRecord(BaseModel):
    check: str
    message: str
    entry: Optional[List[int]] = None
    points: List[float] = Field(default_factory=list)
    values: List[float] = Field(default_factory=list)


class DecoupledRecord(BaseModel):
    t: float
    Mdet: List[List[float]]
    Madv: List[List[float]]
    g: List[float]
    Valg: List[List[float]]
    Vf: List[List[float]]
    Gf: List[List[float]]


class TrajectorySummary(BaseModel):
    points: int
    max_invariance_ratio: Optional[float] = None
    max_step_cond: Optional[float] = None
    reversibility_residual: Optional[float] = None
    oracle_gap: Optional[float] = None
    final_x: List[Optional[float]] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    csv_path: Optional[str] = None


class ReportMetadata(BaseModel):
    tool: str = "tsdae"
    version: str = ""
    generated_at: str = ""
    problem_path: Optional[str] = None


class Report(BaseModel):
    command: str
    form: Optional[str] = None
    description: Optional[str] = None
    n: Optional[int] = None
    m: Optional[int] = None
    index_flag: Optional[str] = None
    tolerances: Optional[Tolerances] = None
    chain: List[ChainPointSummary] = Field(default_factory=list)
    residuals: Dict[str, float] = Field(default_factory=dict)
    warnings: List[WarningRecord] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)
    decoupled: Optional[List[DecoupledRecord]] = None
    trajectory: Optional[TrajectorySummary] = None
    passed: bool = True
    error: Optional[Dict[str, Any]] = None
    metadata: ReportMetadata = Field(default_factory=ReportMetadata)

    def comparison_payload(self) -> Dict[str, Any]:
        """Everything except metadata; identical inputs give identical payloads."""
        return self.model_dump(mode="json", exclude={"metadata"})
