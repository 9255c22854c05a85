from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InputError, TsdaeError, exit_code_for
from .problem import ProblemSpec, load_problem
from .report import (
    build_report,
    chain_frame,
    checks_frame,
    decoupled_frame,
    frame_to_csv,
    render_json,
    render_text,
    trajectory_frame,
    trajectory_summary,
    write_text,
)
from .schemas import Report
from .settings import settings
from .solver import solve
from .verify import analyze_problem, decouple_problem, selftest, verify_problem

logger = logging.getLogger("tsdae.cli")

COMMANDS = ("analyze", "decouple", "solve", "verify", "selftest")
TOLERANCES = ("rank", "residual", "invariance", "step")
LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsdae",
        description="Analyze, decouple and solve index-1 dynamic-algebraic equations on time scales.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("file", nargs="?", default=None, help="JSON problem file (not used by selftest)")
    parser.add_argument("--out", default=None, help="Write the result here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv", "text"), default="json")
    for name in TOLERANCES:
        parser.add_argument(f"--tol.{name}", dest=f"tol_{name}", type=float, default=None, metavar="V")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomised checks")
    parser.add_argument("--workers", type=int, default=None, help="Concurrent checks for verify/selftest")
    parser.add_argument("--log-level", default=None, help="Overrides TSDAE_LOG_LEVEL")
    return parser


def _tol_overrides(args: argparse.Namespace) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for name in TOLERANCES:
        value = getattr(args, f"tol_{name}")
        if value is None:
            continue
        if value <= 0:
            raise InputError(f"--tol.{name} must be positive, got {value!r}")
        out[name] = value
    return out


def _load(args: argparse.Namespace) -> ProblemSpec:
    if args.file is None:
        raise InputError(f"command '{args.command}' needs a problem file")
    return load_problem(args.file, tol_overrides=_tol_overrides(args))


def _render(report: Report, fmt: str) -> str:
    return render_text(report) if fmt == "text" else render_json(report)


def _analyze(args: argparse.Namespace) -> Tuple[str, int]:
    spec = _load(args)
    analysis = analyze_problem(spec)
    report = build_report(
        "analyze",
        spec,
        index_flag=analysis.index_flag.value if analysis.index_flag else None,
        chain=analysis.chain,
        ds=analysis.ds,
        checks=analysis.checks,
    )
    if args.format == "csv":
        text = frame_to_csv(chain_frame(analysis.chain)) if analysis.chain else frame_to_csv(checks_frame(report.checks))
    else:
        text = _render(report, args.format)
    return text, 0 if report.passed else 1


def _decouple(args: argparse.Namespace) -> Tuple[str, int]:
    spec = _load(args)
    ds = decouple_problem(spec)
    if args.format == "csv":
        return frame_to_csv(decoupled_frame(ds)), 0
    report = build_report("decouple", spec, chain=ds.chain, ds=ds, include_decoupled=True)
    return _render(report, args.format), 0


def _solve(args: argparse.Namespace) -> Tuple[str, int]:
    spec = _load(args)
    if spec.x0 is None:
        raise InputError("solve needs initial data (initial.x0)")
    ds = decouple_problem(spec)
    traj = solve(ds, spec.x0, spec.t0, spec.tolerances.step)
    if args.format == "csv":
        return frame_to_csv(trajectory_frame(traj)), 0
    csv_path: Optional[str] = None
    if args.out:
        target = Path(args.out).with_suffix(".trajectory.csv")
        write_text(frame_to_csv(trajectory_frame(traj)), target)
        csv_path = str(target)
    report = build_report("solve", spec, chain=ds.chain, ds=ds, trajectory=trajectory_summary(traj, csv_path=csv_path))
    return _render(report, args.format), 0


def _verify(args: argparse.Namespace) -> Tuple[str, int]:
    spec = _load(args)
    result = verify_problem(spec, seed=args.seed, workers=args.workers)
    analysis = result.analysis
    summary = None
    if result.trajectory is not None:
        summary = trajectory_summary(result.trajectory, reversibility=result.reversibility, oracle_gap=result.oracle_gap)
    report = build_report(
        "verify",
        spec,
        index_flag=analysis.index_flag.value if analysis.index_flag else None,
        chain=analysis.chain,
        ds=analysis.ds,
        checks=result.checks,
        trajectory=summary,
    )
    text = frame_to_csv(checks_frame(report.checks)) if args.format == "csv" else _render(report, args.format)
    return text, 0 if report.passed else 1


def _selftest(args: argparse.Namespace) -> Tuple[str, int]:
    results = selftest(args.seed, workers=args.workers)
    report = build_report("selftest", checks=results)
    text = frame_to_csv(checks_frame(results)) if args.format == "csv" else _render(report, args.format)
    return text, 0 if report.passed else 1


HANDLERS = {
    "analyze": _analyze,
    "decouple": _decouple,
    "solve": _solve,
    "verify": _verify,
    "selftest": _selftest,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)
    logging.basicConfig(level=(args.log_level or settings.log_level).upper(), format=LOG_FORMAT, stream=sys.stderr)
    out = Path(args.out) if args.out else None
    try:
        text, code = HANDLERS[args.command](args)
    except TsdaeError as exc:
        code = exit_code_for(exc)
        logger.error(f"{args.command} failed: {type(exc).__name__}: {exc}")
        sys.stderr.write(f"tsdae: error: {exc}\n")
        if args.format != "csv":
            write_text(_render(build_report(args.command, error=exc), args.format), out)
        return code
    write_text(text, out)
    logger.info(f"{args.command} exit={code} out={out or '-'}")
    return code


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
