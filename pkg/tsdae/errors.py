"""Exception hierarchy for tsdae.

Everything raised on purpose derives from ``TsdaeError``. Errors caused by the
user's input derive from ``InputError`` and map to CLI exit code 2; every other
domain failure maps to exit code 1.
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional, Sequence, Tuple


class TsdaeError(Exception):
    """Base class. ``t`` is the offending grid point when one is known."""

    def __init__(self, message: str, *, t: Optional[float] = None) -> None:
        super().__init__(message)
        self.message = message
        self.t = t

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"error": type(self).__name__, "message": self.message}
        if self.t is not None:
            out["t"] = self.t
        return out


class InputError(TsdaeError):
    pass


class ParseError(InputError):
    """Expression or JSON syntax error.

    ``offset`` is a byte offset into the expression source (or into the JSON
    document); ``location`` names the matrix entry or JSON line/column.
    """

    def __init__(
        self,
        message: str,
        *,
        offset: int = 0,
        expected: str = "",
        location: str = "",
    ) -> None:
        text = message
        if expected:
            text = f"{text} (expected {expected})"
        if location:
            text = f"{location}: {text}"
        super().__init__(f"{text} at offset {offset}")
        self.offset = offset
        self.expected = expected
        self.location = location


class EvalError(InputError):
    def __init__(
        self,
        message: str,
        *,
        t: Optional[float] = None,
        entry: Optional[Tuple[int, int]] = None,
    ) -> None:
        where = ""
        if entry is not None:
            where = f" at entry ({entry[0] + 1},{entry[1] + 1})"
        if t is not None:
            where = f"{where}, t={t!r}"
        super().__init__(f"{message}{where}", t=t)
        self.reason = message
        self.entry = entry


class SchemaError(InputError):
    def __init__(self, message: str, *, locations: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.locations = list(locations)


class DimensionMismatch(InputError):
    pass


class NotAGridPoint(InputError):
    def __init__(self, t: float) -> None:
        super().__init__(f"{t!r} is not a point of the time scale", t=t)


class LastPointUndefined(TsdaeError):
    def __init__(self, t: float) -> None:
        super().__init__(f"delta derivative undefined at the final grid point t={t!r}", t=t)


class NonSquare(TsdaeError):
    pass


class IllConditionedBasis(TsdaeError):
    pass


class NotTransversal(TsdaeError):
    pass


class InverseConditionsViolated(TsdaeError):
    def __init__(self, message: str, *, residuals: Optional[Dict[str, float]] = None) -> None:
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ProjectorInvalid(TsdaeError):
    pass


class NotProperlyStated(TsdaeError):
    pass


class RankDrift(TsdaeError):
    def __init__(self, quantity: str, t1: float, t2: float, v1: Any = None, v2: Any = None) -> None:
        super().__init__(f"{quantity} changes along the grid: {v1} at t={t1!r}, {v2} at t={t2!r}", t=t2)
        self.quantity = quantity
        self.t1 = t1
        self.t2 = t2


class AdmissibilityViolation(TsdaeError):
    pass


class NotIndexOne(TsdaeError):
    pass


class NonRegressiveStep(TsdaeError):
    def __init__(self, t: float, ratio: float) -> None:
        super().__init__(f"step matrix I - mu*Madv is singular at t={t!r} (s_min/s_max={ratio:.3e})", t=t)
        self.ratio = ratio


class OracleStepSingular(TsdaeError):
    def __init__(self, t: float, ratio: float) -> None:
        super().__init__(f"oracle step matrix A^s B^s - mu C^s is singular at t={t!r} (s_min/s_max={ratio:.3e})", t=t)
        self.ratio = ratio


class InsufficientTrajectory(TsdaeError):
    pass


class ConsistencyWarning(UserWarning):
    """Violated hypothesis that does not stop evaluation.

    Collected into reports and logged; never raised.
    """

    def __init__(
        self,
        check: str,
        message: str,
        *,
        points: Sequence[float] = (),
        entry: Optional[Tuple[int, int]] = None,
        values: Sequence[float] = (),
    ) -> None:
        super().__init__(message)
        self.check = check
        self.message = message
        self.points: List[float] = [float(p) for p in points]
        self.entry = entry
        self.values: List[float] = [float(v) for v in values]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "message": self.message,
            "entry": list(self.entry) if self.entry is not None else None,
            "points": self.points,
            "values": self.values,
        }


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, InputError):
        return 2
    return 1
