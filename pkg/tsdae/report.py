"""Report assembly and rendering (JSON, text, CSV)."""

from __future__ import annotations

import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import __version__
from .chain import ChainPoint
from .decouple import DecoupledSystem
from .errors import ConsistencyWarning, TsdaeError
from .problem import ProblemSpec
from .schemas import (
    ChainPointSummary,
    CheckResult,
    DecoupledRecord,
    Report,
    ReportMetadata,
    TrajectorySummary,
    WarningRecord,
)
from .solver import Trajectory

UTC = timezone.utc  # datetime.UTC is 3.11+

DECOUPLED_FIELDS = ("Mdet", "Madv", "g", "Valg", "Vf")


def _json_safe(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays and tuples into JSON values.
    Non-finite floats become None.
    """
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.ndarray):
        return _json_safe(value.tolist())
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set)):
        return [_json_safe(v) for v in list(value)]
    return str(value)


def _finite(value: float) -> Optional[float]:
    return float(value) if math.isfinite(float(value)) else None


# --- builders ----------------------------------------------------------------


def chain_summaries(chain: Sequence[ChainPoint]) -> List[ChainPointSummary]:
    out: List[ChainPointSummary] = []
    for cp in chain:
        out.append(
            ChainPointSummary(
                t=cp.t,
                r=cp.r,
                r1=cp.r1,
                index_flag=cp.index_flag.value,
                det_G1=_finite(np.linalg.det(cp.G1)),
                cond_G1=_finite(np.linalg.cond(cp.G1)),
            )
        )
    return out


def warning_records(warnings: Iterable[ConsistencyWarning]) -> List[WarningRecord]:
    return [WarningRecord(**_json_safe(w.to_dict())) for w in warnings]


def decoupled_records(ds: DecoupledSystem) -> List[DecoupledRecord]:
    return [
        DecoupledRecord(
            t=p.t,
            Mdet=p.Mdet.tolist(),
            Madv=p.Madv.tolist(),
            g=p.g.tolist(),
            Valg=p.Valg.tolist(),
            Vf=p.Vf.tolist(),
            Gf=p.Gf.tolist(),
        )
        for p in ds.points
    ]


def trajectory_summary(
    traj: Trajectory,
    *,
    reversibility: Optional[float] = None,
    oracle_gap: Optional[float] = None,
    csv_path: Optional[str] = None,
) -> TrajectorySummary:
    states = traj.states()
    max_inv = None
    if traj.inv_dist is not None and traj.u is not None:
        ratios = traj.inv_dist / (1.0 + np.linalg.norm(traj.u, axis=1))
        max_inv = _finite(np.max(ratios))
    return TrajectorySummary(
        points=len(traj.ts),
        max_invariance_ratio=max_inv,
        max_step_cond=_finite(traj.max_step_cond()),
        reversibility_residual=reversibility,
        oracle_gap=oracle_gap,
        final_x=_json_safe(states[-1]),
        notes=list(traj.notes),
        csv_path=csv_path,
    )


def build_report(
    command: str,
    spec: Optional[ProblemSpec] = None,
    *,
    index_flag: Optional[str] = None,
    chain: Optional[Sequence[ChainPoint]] = None,
    ds: Optional[DecoupledSystem] = None,
    checks: Sequence[CheckResult] = (),
    include_decoupled: bool = False,
    trajectory: Optional[TrajectorySummary] = None,
    error: Optional[TsdaeError] = None,
) -> Report:
    report = Report(
        command=command,
        checks=list(checks),
        trajectory=trajectory,
        metadata=ReportMetadata(
            version=__version__,
            generated_at=datetime.now(UTC).isoformat(),
            problem_path=spec.path if spec is not None else None,
        ),
    )
    if spec is not None:
        report.form = spec.form
        report.description = spec.description
        report.n, report.m = spec.n, spec.m
        report.tolerances = spec.tolerances
    report.index_flag = index_flag
    if chain is not None:
        report.chain = chain_summaries(chain)
    if ds is not None:
        report.residuals = {k: v for k, v in sorted(ds.residuals.items()) if math.isfinite(v)}
        report.warnings = warning_records(ds.warnings)
        if include_decoupled:
            report.decoupled = decoupled_records(ds)
    if error is not None:
        report.error = _json_safe(error.to_dict())
    report.passed = error is None and all(c.passed for c in report.checks)
    return report


# --- rendering ---------------------------------------------------------------


def report_payload(report: Report) -> Dict[str, Any]:
    payload = _json_safe(report.comparison_payload())
    payload["metadata"] = _json_safe(report.metadata.model_dump(mode="json"))
    return payload


def render_json(report: Report) -> str:
    return json.dumps(report_payload(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_text(report: Report) -> str:
    """Human-readable rendering of the same payload the JSON carries."""
    p = report_payload(report)
    lines: List[str] = [f"tsdae {p['command']}: {'PASS' if p['passed'] else 'FAIL'}"]
    for key in ("form", "description", "n", "m", "index_flag"):
        if p.get(key) is not None:
            lines.append(f"  {key}: {_fmt(p[key])}")
    if p.get("tolerances"):
        lines.append("  tolerances: " + ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(p["tolerances"].items())))
    if p.get("error"):
        lines.append(f"  error: {p['error'].get('error')}: {p['error'].get('message')}")
    if p["chain"]:
        lines += ["", "chain:", pd.DataFrame(p["chain"]).to_string(index=False, float_format=repr, na_rep="-")]
    if p["residuals"]:
        lines += ["", "residuals:"] + [f"  {k}: {_fmt(v)}" for k, v in p["residuals"].items()]
    if p["warnings"]:
        lines += ["", "warnings:"]
        for w in p["warnings"]:
            lines.append(f"  [{w['check']}] {w['message']}")
    if p["checks"]:
        lines += ["", "checks:"]
        for c in p["checks"]:
            mark = "PASS" if c["passed"] else "FAIL"
            tail = f" value={_fmt(c['value'])} tol={_fmt(c['tolerance'])}" if c["tolerance"] is not None else ""
            detail = f" ({c['detail']})" if c["detail"] else ""
            lines.append(f"  {mark} {c['name']}{tail}{detail}")
    if p.get("decoupled"):
        lines += ["", f"decoupled: {len(p['decoupled'])} points (use --format json or csv for coefficients)"]
    if p.get("trajectory"):
        lines += ["", "trajectory:"]
        for key, value in p["trajectory"].items():
            if key == "notes":
                lines += [f"  note: {note}" for note in value]
            elif key == "final_x":
                lines.append(f"  final_x: [{', '.join(_fmt(v) for v in value)}]")
            else:
                lines.append(f"  {key}: {_fmt(value)}")
    return "\n".join(lines) + "\n"


# --- CSV ---------------------------------------------------------------------


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """One row per grid point; σ-valued columns are empty on the final row."""
    n = traj.x_sigma.shape[1]
    data: Dict[str, Any] = {"t": traj.ts.points}
    if traj.u is not None:
        for j in range(traj.u.shape[1]):
            data[f"u_{j + 1}"] = traj.u[:, j]
    if traj.v_sigma is not None:
        for j in range(n):
            data[f"vsigma_{j + 1}"] = traj.v_sigma[:, j]
    for j in range(n):
        data[f"xsigma_{j + 1}"] = traj.x_sigma[:, j]
    if traj.inv_dist is not None:
        data["inv_dist"] = traj.inv_dist
    if traj.step_cond is not None:
        data["step_cond"] = traj.step_cond
    return pd.DataFrame(data)


def decoupled_frame(ds: DecoupledSystem) -> pd.DataFrame:
    """One row per non-final grid point, coefficient matrices flattened row-major."""
    rows: List[Dict[str, float]] = []
    for p in ds.points:
        row: Dict[str, float] = {"t": p.t}
        for name in DECOUPLED_FIELDS:
            M = np.atleast_2d(getattr(p, name))
            if name == "g":
                for i, v in enumerate(np.ravel(M)):
                    row[f"g_{i + 1}"] = float(v)
                continue
            for i in range(M.shape[0]):
                for j in range(M.shape[1]):
                    row[f"{name}_{i + 1}_{j + 1}"] = float(M[i, j])
        rows.append(row)
    return pd.DataFrame(rows)


def checks_frame(checks: Sequence[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([c.model_dump() for c in checks], columns=["name", "passed", "value", "tolerance", "detail"])


def chain_frame(chain: Sequence[ChainPoint]) -> pd.DataFrame:
    return pd.DataFrame([s.model_dump() for s in chain_summaries(chain)])


def frame_to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, na_rep="")


def write_text(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
