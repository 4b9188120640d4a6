"""Turn a scan into an ordered, hashed job plan.

Planning expands a small whitelist of TeX primitives inside directive code,
normalizes the code per directive kind (trim for inline expressions, dedent
for block bodies), resolves pause regions into per-job ``paused`` flags, and
hashes everything so later stages can detect staleness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import fileio
from .errors import WeavetexError
from .model import EXECUTABLE_KINDS, DirectiveKind, Job, content_hash, doc_hash
from .plots import UnknownFormat, resolve_formats
from .scanner import ScanOutput

PLAN_VERSION = 1


class UnmatchedUnpause(WeavetexError):
    """An unpause marker appeared outside any paused region."""


class PauseInsidePause(WeavetexError):
    """A pause marker appeared while already paused; nesting is rejected."""


@dataclass(frozen=True, slots=True)
class JobPlan:
    jobs: tuple[Job, ...]
    doc_hash: str
    clock: tuple[int, int, int]
    # (ordinal, message) pairs; informational, not part of the plan file
    warnings: tuple[tuple[int, str], ...] = field(default=())


def _expand(code: bytes, clock: tuple[int, int, int]) -> bytes:
    """Substitute the whitelisted control sequences.

    Matches respect control-word boundaries: a following ASCII letter means
    a longer control word, which passes through untouched.
    """
    year, month, day = clock
    out = bytearray()
    pos = 0
    while True:
        hit = code.find(b"\\", pos)
        if hit < 0:
            out += code[pos:]
            return bytes(out)
        out += code[pos:hit]
        replacement = None
        for pattern, value in (
            (b"\\the\\year", b"%d" % year),
            (b"\\the\\month", b"%d" % month),
            (b"\\the\\day", b"%d" % day),
            (b"\\percent", b"%"),
        ):
            if code.startswith(pattern, hit) and not _letter_follows(code, hit + len(pattern)):
                replacement = (value, len(pattern))
                break
        if replacement is None:
            out += b"\\"
            pos = hit + 1
        else:
            out += replacement[0]
            pos = hit + replacement[1]


def _letter_follows(code: bytes, offset: int) -> bool:
    if offset >= len(code):
        return False
    byte = code[offset]
    return 0x41 <= byte <= 0x5A or 0x61 <= byte <= 0x7A


def _leading_ws(line: bytes) -> bytes:
    return line[: len(line) - len(line.lstrip(b" \t"))]


def dedent(body: bytes) -> tuple[bytes, str | None]:
    """Strip the longest common leading-space prefix of non-blank lines.

    Returns the dedented body and an optional warning message.  Any tab in a
    non-blank line's indentation disables dedent for the whole block, since
    tab width is not knowable here.
    """
    lines = body.splitlines(keepends=True)
    content_leads = [
        _leading_ws(line) for line in lines if line.strip(b" \t\r\n")
    ]
    if not content_leads:
        return body, None
    if any(b"\t" in lead for lead in content_leads):
        return body, "tab in block indentation; dedent disabled"
    prefix = min(len(lead) for lead in content_leads)
    if prefix == 0:
        return body, None
    out = []
    for line in lines:
        if line.strip(b" \t\r\n"):
            out.append(line[prefix:])
        else:
            # whitespace-only line: remove up to prefix leading spaces
            cut = 0
            while cut < prefix and line[cut : cut + 1] == b" ":
                cut += 1
            out.append(line[cut:])
    return b"".join(out), None


def plan(scan: ScanOutput, clock: tuple[int, int, int]) -> JobPlan:
    jobs: list[Job] = []
    warnings: list[tuple[int, str]] = []
    paused = False
    for directive in scan.directives():
        if directive.kind is DirectiveKind.PAUSE:
            if paused:
                raise PauseInsidePause(
                    "\\sagetexpause inside a paused region",
                    line=directive.span.line,
                )
            paused = True
            continue
        if directive.kind is DirectiveKind.UNPAUSE:
            if not paused:
                raise UnmatchedUnpause(
                    "\\sagetexunpause without a preceding \\sagetexpause",
                    line=directive.span.line,
                )
            paused = False
            continue

        code = _expand(directive.code, clock)
        if directive.kind is DirectiveKind.INLINE_EXPR:
            code = code.strip()
        elif directive.kind in (DirectiveKind.CODE_BLOCK, DirectiveKind.SILENT_BLOCK):
            code, warning = dedent(code)
            if warning is not None:
                warnings.append((directive.ordinal, warning))

        format_token: str | None = None
        format_requests: tuple[str, ...] = ()
        convert = False
        if directive.kind is DirectiveKind.PLOT:
            format_token = _format_token(directive.format, directive.span.line)
            try:
                format_plan = resolve_formats(format_token)
            except UnknownFormat as exc:
                raise UnknownFormat(exc.message, line=directive.span.line) from None
            format_requests = format_plan.formats
            convert = format_plan.convert_to_eps

        jobs.append(
            Job(
                ordinal=directive.ordinal,
                kind=directive.kind,
                code=code,
                paused=paused,
                content_hash=content_hash(
                    directive.kind, code, directive.gfx_options, format_token
                ),
                gfx_options=directive.gfx_options,
                format=format_token,
                plot_format_requests=format_requests,
                convert_to_eps=convert,
            )
        )
    return JobPlan(
        jobs=tuple(jobs),
        doc_hash=doc_hash(job.content_hash for job in jobs),
        clock=clock,
        warnings=tuple(warnings),
    )


def _format_token(raw: bytes | None, line: int) -> str | None:
    if raw is None:
        return None
    try:
        token = raw.decode("utf-8").strip()
    except UnicodeDecodeError:
        raise UnknownFormat(f"unreadable plot format {raw!r}", line=line) from None
    # an empty bracket pair means "no format given"
    return token or None


def write_plan(jp: JobPlan, path) -> None:
    jobs = []
    for job in jp.jobs:
        obj: dict = {
            "ordinal": job.ordinal,
            "kind": job.kind.value,
            "paused": job.paused,
            "content_hash": job.content_hash,
        }
        fileio.put_bytes_field(obj, "code", job.code)
        fileio.put_bytes_field(obj, "gfx_options", job.gfx_options)
        if job.format is not None:
            obj["format"] = job.format
        jobs.append(obj)
    fileio.dump_json_atomic(
        {
            "version": PLAN_VERSION,
            "clock": list(jp.clock),
            "doc_hash": jp.doc_hash,
            "jobs": jobs,
        },
        path,
    )


def read_plan(path) -> JobPlan:
    doc = fileio.load_json_document(path, PLAN_VERSION)
    try:
        clock_raw = doc["clock"]
        jobs_raw = doc["jobs"]
        stored_doc_hash = doc["doc_hash"]
    except KeyError as exc:
        raise fileio.ParseError(f"{path}: missing field {exc.args[0]!r}") from None
    if (
        not isinstance(clock_raw, list)
        or len(clock_raw) != 3
        or not all(isinstance(part, int) for part in clock_raw)
    ):
        raise fileio.ParseError(f"{path}: clock must be three integers")
    if not isinstance(jobs_raw, list) or not isinstance(stored_doc_hash, str):
        raise fileio.ParseError(f"{path}: malformed plan document")

    jobs = []
    for obj in jobs_raw:
        jobs.append(_parse_job(obj, path))
    recomputed = doc_hash(job.content_hash for job in jobs)
    if recomputed != stored_doc_hash:
        raise fileio.ParseError(f"{path}: doc_hash does not match job hashes")
    return JobPlan(
        jobs=tuple(jobs),
        doc_hash=stored_doc_hash,
        clock=(clock_raw[0], clock_raw[1], clock_raw[2]),
    )


def _parse_job(obj, path) -> Job:
    if not isinstance(obj, dict):
        raise fileio.ParseError(f"{path}: job entry must be an object")
    try:
        ordinal = obj["ordinal"]
        kind_name = obj["kind"]
        paused = obj["paused"]
        stored_hash = obj["content_hash"]
    except KeyError as exc:
        raise fileio.ParseError(f"{path}: job missing field {exc.args[0]!r}") from None
    if not isinstance(ordinal, int) or isinstance(ordinal, bool) or ordinal < 0:
        raise fileio.ParseError(f"{path}: bad job ordinal {ordinal!r}")
    if not isinstance(paused, bool) or not isinstance(stored_hash, str):
        raise fileio.ParseError(f"{path}: malformed job {ordinal}")
    try:
        kind = DirectiveKind(kind_name)
    except ValueError:
        raise fileio.ParseError(f"{path}: unknown job kind {kind_name!r}") from None
    if kind not in EXECUTABLE_KINDS:
        raise fileio.ParseError(f"{path}: job {ordinal} has non-executable kind")
    code = fileio.get_bytes_field(obj, "code")
    if code is None:
        raise fileio.ParseError(f"{path}: job {ordinal} has no code")
    gfx_options = fileio.get_bytes_field(obj, "gfx_options")
    format_token = obj.get("format")
    if format_token is not None and not isinstance(format_token, str):
        raise fileio.ParseError(f"{path}: job {ordinal} format must be a string")

    format_requests: tuple[str, ...] = ()
    convert = False
    if kind is DirectiveKind.PLOT:
        try:
            format_plan = resolve_formats(format_token)
        except UnknownFormat as exc:
            raise fileio.ParseError(f"{path}: job {ordinal}: {exc.message}") from None
        format_requests = format_plan.formats
        convert = format_plan.convert_to_eps

    if content_hash(kind, code, gfx_options, format_token) != stored_hash:
        raise fileio.ParseError(
            f"{path}: job {ordinal} content_hash does not match its fields"
        )
    return Job(
        ordinal=ordinal,
        kind=kind,
        code=code,
        paused=paused,
        content_hash=stored_hash,
        gfx_options=gfx_options,
        format=format_token,
        plot_format_requests=format_requests,
        convert_to_eps=convert,
    )
