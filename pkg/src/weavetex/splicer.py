"""Substitute results back into the document.

Text outside directives passes through byte-exact.  Inline expressions
become their LaTeX fragments, code blocks become verbatim listings of the
original (pre-dedent) body, silent blocks and pause markers vanish, plots
become ``\\includegraphics`` lines.  Anything without a usable result gets
the ``\\mbox{??}`` placeholder plus a warning, mirroring how LaTeX flags an
unresolved reference.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import WeavetexError
from .model import Directive, DirectiveKind, ResultRecord, ResultSet, ResultStatus
from .planner import JobPlan
from .plots import PlotSpec, includegraphics_text, resolve_formats
from .scanner import ScanOutput

PLACEHOLDER = b"\\mbox{??}"


class DocMismatch(WeavetexError):
    """The results belong to a different version of the document."""


@dataclass(frozen=True, slots=True)
class ResolvedDocument:
    text: bytes
    warnings: tuple[tuple[int, str], ...]
    unresolved_count: int


def splice(
    scan: ScanOutput,
    rs: ResultSet,
    plan: JobPlan | None = None,
    plots_dir: str = "sage-plots",
) -> ResolvedDocument:
    if plan is not None and plan.doc_hash != rs.doc_hash:
        raise DocMismatch(
            "results file was produced from a different document "
            f"(plan {plan.doc_hash[:12]}…, results {rs.doc_hash[:12]}…)"
        )
    out = bytearray()
    warnings: list[tuple[int, str]] = []
    unresolved = 0
    for segment in scan.segments:
        if not isinstance(segment, Directive):
            out += scan.source[segment.span.byte_start : segment.span.byte_end]
            continue
        directive = segment
        kind = directive.kind
        if kind in (DirectiveKind.PAUSE, DirectiveKind.UNPAUSE):
            continue
        record = rs.records.get(directive.ordinal)
        if kind is DirectiveKind.INLINE_EXPR:
            if record is not None and record.status is ResultStatus.OK and record.latex is not None:
                out += record.latex
            else:
                out += PLACEHOLDER
                unresolved += 1
                warnings.append((directive.ordinal, _gap_message(record)))
        elif kind is DirectiveKind.CODE_BLOCK:
            out += b"\\begin{verbatim}\n"
            out += directive.code
            out += b"\\end{verbatim}"
            if scan.source[directive.span.byte_end - 1 : directive.span.byte_end] == b"\n":
                out += b"\n"
            if record is not None and record.status is ResultStatus.ERROR:
                warnings.append((directive.ordinal, _error_message(record)))
        elif kind is DirectiveKind.SILENT_BLOCK:
            if record is not None and record.status is ResultStatus.ERROR:
                warnings.append((directive.ordinal, _error_message(record)))
        elif kind is DirectiveKind.PLOT:
            if record is not None and record.status is ResultStatus.OK:
                out += includegraphics_text(_plot_spec(directive, plots_dir))
            else:
                out += PLACEHOLDER
                unresolved += 1
                warnings.append((directive.ordinal, _gap_message(record)))
        else:
            raise ValueError(f"unhandled directive kind {kind!r}")
    return ResolvedDocument(bytes(out), tuple(warnings), unresolved)


def _plot_spec(directive: Directive, plots_dir: str) -> PlotSpec:
    token = None
    if directive.format is not None:
        token = directive.format.decode("utf-8", errors="replace").strip() or None
    return PlotSpec(
        ordinal=directive.ordinal,
        formats=resolve_formats(token).formats,
        gfx_options=directive.gfx_options or b"",
        out_dir=plots_dir,
    )


def _gap_message(record: ResultRecord | None) -> str:
    if record is None:
        return "no result recorded for this directive"
    if record.status is ResultStatus.ERROR:
        return _error_message(record)
    return "directive was skipped (paused); placeholder emitted"


def _error_message(record: ResultRecord) -> str:
    return f"job failed: {record.error_message or 'unknown error'}"
