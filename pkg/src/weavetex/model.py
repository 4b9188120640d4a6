"""Shared value types: directives, spans, jobs, and results.

All types are immutable values and safe to share between tasks.  Offsets are
byte offsets throughout, so documents round-trip losslessly regardless of
encoding.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Mapping

#: Digest function used for job and document hashes (named in docs/FORMATS.md).
DIGEST_NAME = "sha256"


class DirectiveKind(Enum):
    """The closed set of computation-site kinds."""

    INLINE_EXPR = "InlineExpr"
    CODE_BLOCK = "CodeBlock"
    SILENT_BLOCK = "SilentBlock"
    PLOT = "Plot"
    PAUSE = "Pause"
    UNPAUSE = "Unpause"


#: Kinds that produce a Job; Pause/Unpause only toggle the paused flag.
EXECUTABLE_KINDS = frozenset(
    {
        DirectiveKind.INLINE_EXPR,
        DirectiveKind.CODE_BLOCK,
        DirectiveKind.SILENT_BLOCK,
        DirectiveKind.PLOT,
    }
)


@dataclass(frozen=True, slots=True)
class SourceSpan:
    """A byte range in the source with the 1-based line of its start."""

    byte_start: int
    byte_end: int
    line: int

    def __post_init__(self) -> None:
        if self.byte_start < 0 or self.byte_end < self.byte_start:
            raise ValueError(f"invalid span [{self.byte_start}, {self.byte_end})")
        if self.line < 1:
            raise ValueError(f"line numbers are 1-based, got {self.line}")


@dataclass(frozen=True, slots=True)
class TextSpan:
    """A literal text segment between directives."""

    span: SourceSpan


@dataclass(frozen=True, slots=True)
class Directive:
    """One extracted computation site.

    ``code`` holds the exact source bytes of the argument or body, before any
    expansion or dedent.  ``gfx_options`` and ``format`` are only ever set for
    Plot directives; an empty ``gfx_options`` (``\\sageplot[][png]{..}``) is
    distinct from an absent one.
    """

    kind: DirectiveKind
    code: bytes
    span: SourceSpan
    ordinal: int
    gfx_options: bytes | None = None
    format: bytes | None = None


@dataclass(frozen=True, slots=True)
class Job:
    """One executable unit of a plan: expanded, dedented, hashed code."""

    ordinal: int
    kind: DirectiveKind
    code: bytes
    paused: bool
    content_hash: str
    gfx_options: bytes | None = None
    format: str | None = None
    plot_format_requests: tuple[str, ...] = ()
    convert_to_eps: bool = False


class ResultStatus(Enum):
    """Outcome of one job."""

    OK = "ok"
    SKIPPED = "skipped"
    ERROR = "error"


@dataclass(frozen=True, slots=True)
class ResultRecord:
    """The value produced (or not) for one job ordinal."""

    ordinal: int
    status: ResultStatus
    latex: bytes | None = None
    files: tuple[str, ...] | None = None
    error_message: str | None = None
    conversion_requested: bool = False


@dataclass(frozen=True)
class ResultSet:
    """Records for every job of one plan, keyed by ordinal."""

    records: Mapping[int, ResultRecord]
    doc_hash: str
    backend_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", MappingProxyType(dict(self.records)))


def _frame(hasher, data: bytes | None) -> None:
    # Length-framed with a presence byte so absent/empty/adjacent fields can
    # never collide.
    if data is None:
        hasher.update(b"\x00")
    else:
        hasher.update(b"\x01" + len(data).to_bytes(8, "big") + data)


def content_hash(
    kind: DirectiveKind,
    code: bytes,
    gfx_options: bytes | None = None,
    format: str | None = None,
) -> str:
    """Digest of one job's identity fields as 64 lowercase hex chars.

    Any single-byte change to any field changes the digest.
    """
    hasher = hashlib.sha256()
    _frame(hasher, kind.value.encode("ascii"))
    _frame(hasher, code)
    _frame(hasher, gfx_options)
    _frame(hasher, None if format is None else format.encode("utf-8"))
    return hasher.hexdigest()


def doc_hash(job_hashes: "list[str] | tuple[str, ...]") -> str:
    """Digest of all job content hashes in plan order."""
    hasher = hashlib.sha256()
    for job_hash in job_hashes:
        hasher.update(job_hash.encode("ascii"))
        hasher.update(b"\n")
    return hasher.hexdigest()
