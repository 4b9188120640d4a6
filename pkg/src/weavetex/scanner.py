"""Lossless splitter of LaTeX source into literal text and directives.

The scanner understands just enough TeX lexing to be safe: ``%`` comments,
``\\verb<delim>...<delim>``, and ``verbatim`` environment bodies are opaque,
and an unknown control word is skipped as a unit so ``\\sagetexindent`` can
never be mistaken for ``\\sage``.  Directive code is captured byte-verbatim;
no expansion, dedent, or validation happens here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import WeavetexError
from .model import Directive, DirectiveKind, SourceSpan, TextSpan


class UnbalancedGroup(WeavetexError):
    """A brace or bracket argument never closes."""


class UnterminatedEnvironment(WeavetexError):
    """A ``\\begin{...}`` has no matching ``\\end{...}``."""


class UnterminatedVerb(WeavetexError):
    """A ``\\verb`` delimiter never repeats."""


@dataclass(frozen=True)
class ScanOutput:
    """Ordered segments covering the whole input."""

    source: bytes
    segments: tuple[TextSpan | Directive, ...]

    @property
    def source_len(self) -> int:
        return len(self.source)

    def directives(self) -> tuple[Directive, ...]:
        return tuple(s for s in self.segments if isinstance(s, Directive))

    def reconstruct(self) -> bytes:
        """Concatenate the source bytes of all segments."""
        return b"".join(
            self.source[s.span.byte_start : s.span.byte_end] for s in self.segments
        )


_INTERESTING = re.compile(rb"[%\\]")
_LETTERS = re.compile(rb"[A-Za-z]+")
_ENV_NAME = re.compile(rb"\{([A-Za-z*]+)\}")
_BLOCK_ENVS = {
    b"sageblock": DirectiveKind.CODE_BLOCK,
    b"sagesilent": DirectiveKind.SILENT_BLOCK,
}


def _line_at(source: bytes, pos: int) -> int:
    return source.count(b"\n", 0, pos) + 1


def _skip_inline_ws(source: bytes, pos: int) -> int:
    while pos < len(source) and source[pos : pos + 1] in (b" ", b"\t"):
        pos += 1
    return pos


def read_group(source: bytes, open_offset: int) -> tuple[bytes, int]:
    """Read a balanced ``{...}`` group starting at ``open_offset``.

    Returns the bytes between the outer braces and the offset just past the
    closing brace.  Nested ``{}`` pairs are honored; ``\\`` escapes the next
    byte, so ``\\{`` and ``\\}`` are literals.
    """
    if source[open_offset : open_offset + 1] != b"{":
        raise ValueError(f"no group opener at offset {open_offset}")
    depth = 0
    i = open_offset
    n = len(source)
    while i < n:
        c = source[i]
        if c == 0x5C:  # backslash: next byte is literal
            i += 2
            continue
        if c == 0x7B:  # {
            depth += 1
        elif c == 0x7D:  # }
            depth -= 1
            if depth == 0:
                return source[open_offset + 1 : i], i + 1
        i += 1
    raise UnbalancedGroup("group never closes", _line_at(source, open_offset))


def _read_bracket(source: bytes, open_offset: int) -> tuple[bytes, int]:
    # Like read_group for [...]; a ] inside a {} group does not close it.
    depth = 0
    i = open_offset + 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == 0x5C:
            i += 2
            continue
        if c == 0x7B:
            depth += 1
        elif c == 0x7D:
            depth = max(0, depth - 1)
        elif c == 0x5D and depth == 0:  # ]
            return source[open_offset + 1 : i], i + 1
        i += 1
    raise UnbalancedGroup("optional argument never closes", _line_at(source, open_offset))


def _skip_comment(source: bytes, offset: int) -> int:
    nl = source.find(b"\n", offset)
    return len(source) if nl == -1 else nl + 1


def _skip_verb(source: bytes, offset: int) -> int:
    # offset points at the backslash of \verb; an optional * precedes the
    # delimiter, which is any single byte.
    i = offset + len(b"\\verb")
    if source[i : i + 1] == b"*":
        i += 1
    delim = source[i : i + 1]
    if not delim:
        raise UnterminatedVerb("\\verb at end of input", _line_at(source, offset))
    end = source.find(delim, i + 1)
    if end == -1:
        raise UnterminatedVerb(
            f"\\verb delimiter {delim!r} never repeats", _line_at(source, offset)
        )
    return end + 1


def _skip_verbatim(source: bytes, offset: int) -> int:
    closer = b"\\end{verbatim}"
    end = source.find(closer, offset)
    if end == -1:
        raise UnterminatedEnvironment(
            "missing \\end{verbatim}", _line_at(source, offset)
        )
    return end + len(closer)


def skip_opaque(source: bytes, offset: int) -> int:
    """Return the first offset after the opaque region starting at ``offset``.

    ``offset`` must sit at ``%``, ``\\verb``, or ``\\begin{verbatim}``.
    """
    if source[offset : offset + 1] == b"%":
        return _skip_comment(source, offset)
    if source.startswith(b"\\verb", offset) and not _LETTERS.match(source, offset + 5):
        return _skip_verb(source, offset)
    if source.startswith(b"\\begin{verbatim}", offset):
        return _skip_verbatim(source, offset)
    raise ValueError(f"offset {offset} is not at an opaque region")


def _block_directive(
    source: bytes, start: int, begin_close: int, env: bytes, kind: DirectiveKind, ordinal: int
) -> tuple[Directive, int]:
    # Body runs from after the first newline following \begin{env} to the
    # start of the line holding \end{env}; begin/end lines are excluded.
    closer = b"\\end{" + env + b"}"
    end_idx = source.find(closer, begin_close)
    if end_idx == -1:
        raise UnterminatedEnvironment(
            f"missing \\end{{{env.decode('ascii')}}}", _line_at(source, start)
        )
    first_nl = source.find(b"\n", begin_close)
    if first_nl == -1 or first_nl > end_idx:
        body = b""
    else:
        end_line_start = source.rfind(b"\n", 0, end_idx) + 1
        body = source[first_nl + 1 : max(first_nl + 1, end_line_start)]
    span_end = end_idx + len(closer)
    # The block owns its lines: swallow the newline after \end{env} so a
    # removed block leaves no blank line behind.
    if source[span_end : span_end + 1] == b"\n":
        span_end += 1
    directive = Directive(
        kind=kind,
        code=body,
        span=SourceSpan(start, span_end, _line_at(source, start)),
        ordinal=ordinal,
    )
    return directive, span_end


def _plot_directive(source: bytes, start: int, ordinal: int) -> tuple[Directive, int]:
    line = _line_at(source, start)
    i = _skip_inline_ws(source, start + len(b"\\sageplot"))
    gfx_options: bytes | None = None
    format_arg: bytes | None = None
    if source[i : i + 1] == b"[":
        gfx_options, i = _read_bracket(source, i)
        i = _skip_inline_ws(source, i)
        if source[i : i + 1] == b"[":
            format_arg, i = _read_bracket(source, i)
            i = _skip_inline_ws(source, i)
    if source[i : i + 1] != b"{":
        raise UnbalancedGroup("\\sageplot is missing its brace argument", line)
    code, end = read_group(source, i)
    directive = Directive(
        kind=DirectiveKind.PLOT,
        code=code,
        span=SourceSpan(start, end, line),
        ordinal=ordinal,
        gfx_options=gfx_options,
        format=format_arg,
    )
    return directive, end


def _inline_directive(source: bytes, start: int, ordinal: int) -> tuple[Directive, int]:
    line = _line_at(source, start)
    i = _skip_inline_ws(source, start + len(b"\\sage"))
    if source[i : i + 1] != b"{":
        raise UnbalancedGroup("\\sage is missing its brace argument", line)
    code, end = read_group(source, i)
    directive = Directive(
        kind=DirectiveKind.INLINE_EXPR,
        code=code,
        span=SourceSpan(start, end, line),
        ordinal=ordinal,
    )
    return directive, end


def scan_document(source: bytes) -> ScanOutput:
    """Split ``source`` into text spans and directives, in document order.

    Directive-like text inside comments, ``\\verb``, and verbatim environments
    stays literal text.  Raises UnbalancedGroup, UnterminatedEnvironment, or
    UnterminatedVerb with the offending line number.
    """
    segments: list[TextSpan | Directive] = []
    text_start = 0
    ordinal = 0
    i = 0
    n = len(source)

    def emit(directive: Directive, span_end: int) -> int:
        nonlocal text_start, ordinal
        start = directive.span.byte_start
        if start > text_start:
            segments.append(
                TextSpan(SourceSpan(text_start, start, _line_at(source, text_start)))
            )
        segments.append(directive)
        ordinal += 1
        text_start = span_end
        return span_end

    while i < n:
        hit = _INTERESTING.search(source, i)
        if hit is None:
            break
        i = hit.start()
        if source[i] == 0x25:  # %
            i = _skip_comment(source, i)
            continue
        word_match = _LETTERS.match(source, i + 1)
        if word_match is None:
            i += 2  # control symbol such as \% or \\
            continue
        word = word_match.group(0)
        after = word_match.end()
        if word == b"verb":
            i = _skip_verb(source, i)
        elif word == b"begin":
            j = _skip_inline_ws(source, after)
            env_match = _ENV_NAME.match(source, j)
            env = env_match.group(1) if env_match else None
            if env == b"verbatim":
                i = _skip_verbatim(source, i)
            elif env in _BLOCK_ENVS:
                directive, end = _block_directive(
                    source, i, env_match.end(), env, _BLOCK_ENVS[env], ordinal
                )
                i = emit(directive, end)
            else:
                i = after  # any other environment is ordinary text
        elif word == b"sage":
            directive, end = _inline_directive(source, i, ordinal)
            i = emit(directive, end)
        elif word == b"sageplot":
            directive, end = _plot_directive(source, i, ordinal)
            i = emit(directive, end)
        elif word in (b"sagetexpause", b"sagetexunpause"):
            kind = (
                DirectiveKind.PAUSE
                if word == b"sagetexpause"
                else DirectiveKind.UNPAUSE
            )
            directive = Directive(
                kind=kind,
                code=b"",
                span=SourceSpan(i, after, _line_at(source, i)),
                ordinal=ordinal,
            )
            i = emit(directive, after)
        else:
            i = after

    if text_start < n:
        segments.append(
            TextSpan(SourceSpan(text_start, n, _line_at(source, text_start)))
        )
    return ScanOutput(source=source, segments=tuple(segments))
