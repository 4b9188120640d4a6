"""Command-line interface: scan, run, splice, and the all-in-one build.

Exit codes: 0 success, 1 finished with job errors (or, under --strict,
unresolved placeholders), 2 pipeline failure (unreadable input, malformed
artifacts, scan/plan errors, backend startup or protocol failure).
Diagnostics go to stderr as `<file>:<line>: <severity>: <message>` so
editors can jump to them; the census and nothing else goes to stdout.
"""

from __future__ import annotations

import argparse
import datetime
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .backends import make_backend
from .errors import WeavetexError
from .executor import execute
from .model import DirectiveKind, ResultSet, ResultStatus
from .planner import JobPlan, plan, read_plan, write_plan
from .results_io import read_results, write_results
from .scanner import ScanOutput, scan_document
from .splicer import ResolvedDocument, splice

_PLOT_FILE_RE = re.compile(r"plot-\d+\.(pdf|eps|png)\Z")


@dataclass(frozen=True, slots=True)
class Config:
    backend: str
    clock: tuple[int, int, int] | None
    plots_dir: str
    strict: bool
    clean_plots: bool
    out: str | None


def _parse_clock(text: str) -> tuple[int, int, int]:
    parts = text.split("-")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"clock must be Y-M-D, got {text!r}")
    try:
        year, month, day = (int(part) for part in parts)
        datetime.date(year, month, day)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid clock {text!r}: {exc}") from None
    return (year, month, day)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weavetex",
        description="Extract computations from a LaTeX document, run them, "
        "and splice the results back in.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, backend=False, clock=False,
                   strict=False, plots=False, out=False) -> None:
        p.add_argument("input", help="LaTeX source file")
        if backend:
            p.add_argument(
                "--backend",
                default=os.environ.get("WEAVETEX_BACKEND", "builtin"),
                help="'builtin' or 'subprocess:<command line>' "
                "(default from WEAVETEX_BACKEND, else builtin)",
            )
        if clock:
            p.add_argument(
                "--clock", type=_parse_clock, default=None, metavar="Y-M-D",
                help="date used for \\the\\year etc. (default: today)",
            )
        if plots:
            p.add_argument(
                "--plots-dir", default="sage-plots",
                help="plot directory, relative to the output document",
            )
            p.add_argument(
                "--clean-plots", action="store_true",
                help="delete previously generated plot files first",
            )
        if strict:
            p.add_argument(
                "--strict", action="store_true",
                help="treat unresolved placeholders as errors",
            )
        if out:
            p.add_argument(
                "--out", default=None,
                help="resolved document path (default: <input>.resolved.tex)",
            )

    p_scan = sub.add_parser("scan", help="scan and plan; write the .jobs file")
    add_common(p_scan, clock=True)

    p_run = sub.add_parser("run", help="execute the .jobs plan; write the .wout file")
    add_common(p_run, backend=True, plots=True, out=True)

    p_splice = sub.add_parser("splice", help="splice results into the resolved document")
    add_common(p_splice, strict=True, plots=True, out=True)

    p_build = sub.add_parser("build", help="scan, run, and splice in one step")
    add_common(p_build, backend=True, clock=True, strict=True, plots=True, out=True)

    return parser


def _config_from_args(args) -> Config:
    return Config(
        backend=getattr(args, "backend", "builtin"),
        clock=getattr(args, "clock", None),
        plots_dir=getattr(args, "plots_dir", "sage-plots"),
        strict=getattr(args, "strict", False),
        clean_plots=getattr(args, "clean_plots", False),
        out=getattr(args, "out", None),
    )


def _diag(path, line: int | None, severity: str, message: str) -> None:
    location = f"{path}:{line}" if line is not None else str(path)
    print(f"{location}: {severity}: {message}", file=sys.stderr)


def _clock_or_today(config: Config) -> tuple[int, int, int]:
    if config.clock is not None:
        return config.clock
    today = datetime.date.today()
    return (today.year, today.month, today.day)


def _read_source(path: Path) -> bytes | None:
    try:
        return path.read_bytes()
    except OSError as exc:
        _diag(path, None, "error", f"cannot read input: {exc}")
        return None


def _jobs_path(input_path: Path) -> Path:
    return input_path.with_suffix(".jobs")


def _wout_path(input_path: Path) -> Path:
    return input_path.with_suffix(".wout")


def _out_path(input_path: Path, config: Config) -> Path:
    if config.out is not None:
        return Path(config.out)
    return input_path.with_suffix(".resolved.tex")


def _line_map(scan: ScanOutput) -> dict[int, int]:
    return {d.ordinal: d.span.line for d in scan.directives()}


def _print_census(scan: ScanOutput) -> None:
    counts = {kind: 0 for kind in DirectiveKind}
    for directive in scan.directives():
        counts[directive.kind] += 1
    for kind in DirectiveKind:
        print(f"{kind.value}: {counts[kind]}")


def _clean_plot_files(plots_abs: Path) -> None:
    if not plots_abs.is_dir():
        return
    for entry in plots_abs.iterdir():
        if entry.is_file() and _PLOT_FILE_RE.match(entry.name):
            entry.unlink()


def _scan_and_plan(
    input_path: Path, clock: tuple[int, int, int]
) -> tuple[ScanOutput, JobPlan] | None:
    source = _read_source(input_path)
    if source is None:
        return None
    try:
        scan = scan_document(source)
        jobplan = plan(scan, clock)
    except WeavetexError as exc:
        _diag(input_path, exc.line, "error", exc.message)
        return None
    return scan, jobplan


def _report_plan_warnings(input_path: Path, scan: ScanOutput, jobplan: JobPlan) -> None:
    lines = _line_map(scan)
    for ordinal, message in jobplan.warnings:
        _diag(input_path, lines.get(ordinal), "warning", message)


def _load_cache(wout_path: Path) -> ResultSet | None:
    if not wout_path.exists():
        return None
    try:
        return read_results(wout_path)
    except WeavetexError as exc:
        _diag(wout_path, None, "warning", f"ignoring stale results file: {exc.message}")
        return None


def _execute_plan(input_path: Path, jobplan: JobPlan, config: Config) -> ResultSet | None:
    """Back half shared by run and build: execute the plan, persist results."""
    wout_path = _wout_path(input_path)
    cache = _load_cache(wout_path)
    if cache is not None and cache.doc_hash == jobplan.doc_hash:
        _diag(input_path, None, "note", "cache hit; skipping execution")
    base_dir = _out_path(input_path, config).parent
    try:
        backend = make_backend(config.backend, base_dir)
    except WeavetexError as exc:
        _diag(input_path, None, "error", exc.message)
        return None
    if config.clean_plots:
        _clean_plot_files(base_dir / config.plots_dir)
    try:
        rs = execute(jobplan, backend, cache, plots_dir=config.plots_dir)
    except WeavetexError as exc:
        _diag(input_path, None, "error", exc.message)
        return None
    try:
        write_results(rs, wout_path)
    except WeavetexError as exc:
        _diag(wout_path, None, "error", exc.message)
        return None
    return rs


def _write_resolved(
    input_path: Path,
    scan: ScanOutput,
    rs: ResultSet,
    jobplan: JobPlan,
    config: Config,
) -> int:
    try:
        resolved = splice(scan, rs, plan=jobplan, plots_dir=config.plots_dir)
    except WeavetexError as exc:
        _diag(input_path, exc.line, "error", exc.message)
        return 2
    out_path = _out_path(input_path, config)
    try:
        out_path.write_bytes(resolved.text)
    except OSError as exc:
        _diag(out_path, None, "error", f"cannot write output: {exc}")
        return 2
    return _finish(input_path, scan, rs, resolved, config.strict)


def _finish(
    input_path: Path,
    scan: ScanOutput,
    rs: ResultSet,
    resolved: ResolvedDocument,
    strict: bool,
) -> int:
    lines = _line_map(scan)
    for ordinal, message in resolved.warnings:
        _diag(input_path, lines.get(ordinal), "warning", message)
    has_errors = any(
        record.status is ResultStatus.ERROR for record in rs.records.values()
    )
    if has_errors:
        return 1
    if strict and resolved.unresolved_count > 0:
        _diag(input_path, None, "error",
              f"{resolved.unresolved_count} unresolved placeholder(s) under --strict")
        return 1
    return 0


def cmd_scan(input_path: Path, config: Config) -> int:
    front = _scan_and_plan(input_path, _clock_or_today(config))
    if front is None:
        return 2
    scan, jobplan = front
    try:
        write_plan(jobplan, _jobs_path(input_path))
    except WeavetexError as exc:
        _diag(input_path, None, "error", exc.message)
        return 2
    _print_census(scan)
    _report_plan_warnings(input_path, scan, jobplan)
    return 0


def cmd_run(input_path: Path, config: Config) -> int:
    jobs_path = _jobs_path(input_path)
    if not jobs_path.exists():
        _diag(input_path, None, "error", "no job plan; run the scan stage first")
        return 2
    try:
        jobplan = read_plan(jobs_path)
    except WeavetexError as exc:
        _diag(jobs_path, None, "error", exc.message)
        return 2
    rs = _execute_plan(input_path, jobplan, config)
    if rs is None:
        return 2
    failed = False
    for ordinal in sorted(rs.records):
        record = rs.records[ordinal]
        if record.status is ResultStatus.ERROR:
            failed = True
            _diag(input_path, None, "error", f"job {ordinal}: {record.error_message}")
    return 1 if failed else 0


def cmd_splice(input_path: Path, config: Config) -> int:
    source = _read_source(input_path)
    if source is None:
        return 2
    jobs_path = _jobs_path(input_path)
    wout_path = _wout_path(input_path)
    if not jobs_path.exists():
        _diag(input_path, None, "error", "no job plan; run the scan stage first")
        return 2
    if not wout_path.exists():
        _diag(input_path, None, "error", "no results file; run the run stage first")
        return 2
    try:
        stored = read_plan(jobs_path)
        scan = scan_document(source)
        jobplan = plan(scan, stored.clock)
        if jobplan.doc_hash != stored.doc_hash:
            _diag(input_path, None, "error",
                  "document changed since the scan stage; re-run scan")
            return 2
        rs = read_results(wout_path)
    except WeavetexError as exc:
        _diag(input_path, exc.line, "error", exc.message)
        return 2
    return _write_resolved(input_path, scan, rs, jobplan, config)


def cmd_build(input_path: Path, config: Config) -> int:
    front = _scan_and_plan(input_path, _clock_or_today(config))
    if front is None:
        return 2
    scan, jobplan = front
    try:
        write_plan(jobplan, _jobs_path(input_path))
    except WeavetexError as exc:
        _diag(input_path, None, "error", exc.message)
        return 2
    _report_plan_warnings(input_path, scan, jobplan)
    rs = _execute_plan(input_path, jobplan, config)
    if rs is None:
        return 2
    return _write_resolved(input_path, scan, rs, jobplan, config)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "scan": cmd_scan,
        "run": cmd_run,
        "splice": cmd_splice,
        "build": cmd_build,
    }
    return handlers[args.command](Path(args.input), _config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
