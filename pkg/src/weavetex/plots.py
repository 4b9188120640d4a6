"""Plot file naming, format resolution, and graphics-inclusion text."""

from __future__ import annotations

import posixpath
from dataclasses import dataclass

from .errors import WeavetexError

# Payload the builtin backend writes for every plot file it is asked to
# produce.  Fixed 16 bytes so tests can assert on file content.
PLOT_STUB_PAYLOAD = b"WEAVETEX-PLOT-01"

_DIRECT_FORMATS = frozenset({"pdf", "eps", "png"})
_KNOWN_TOKENS = _DIRECT_FORMATS | {"imagemagick"}


class UnknownFormat(WeavetexError):
    """The requested plot format token is not recognized."""


@dataclass(frozen=True, slots=True)
class FormatPlan:
    """Which files to request from the backend, plus any post-step."""

    formats: tuple[str, ...]
    convert_to_eps: bool = False


def resolve_formats(token: str | None) -> FormatPlan:
    """Map a directive's format token to concrete file formats.

    No token means the classic pair (pdf and eps).  "imagemagick" asks the
    backend for a png and flags an eps conversion for a later toolchain
    step; this stage only records the flag.
    """
    if token is None:
        return FormatPlan(("pdf", "eps"))
    if token == "imagemagick":
        return FormatPlan(("png",), convert_to_eps=True)
    if token in _DIRECT_FORMATS:
        return FormatPlan((token,))
    raise UnknownFormat(f"unknown plot format {token!r}")


def plot_filename(ordinal: int, fmt: str) -> str:
    return f"plot-{ordinal}.{fmt}"


def plot_basename(ordinal: int) -> str:
    return f"plot-{ordinal}"


def plot_save_path(plots_dir: str, ordinal: int, fmt: str) -> str:
    """Relative path (forward slashes) the backend is asked to write."""
    return posixpath.join(plots_dir, plot_filename(ordinal, fmt))


@dataclass(frozen=True, slots=True)
class PlotSpec:
    """Everything needed to emit the inclusion text for one plot."""

    ordinal: int
    formats: tuple[str, ...]
    gfx_options: bytes
    out_dir: str

    def __post_init__(self) -> None:
        if not self.formats:
            raise ValueError("PlotSpec.formats must be non-empty")
        for fmt in self.formats:
            if fmt not in _KNOWN_TOKENS:
                raise ValueError(f"invalid format token {fmt!r}")


def includegraphics_text(spec: PlotSpec) -> bytes:
    """LaTeX inclusion fragment; extensionless so the engine picks the file."""
    options = b"[" + spec.gfx_options + b"]" if spec.gfx_options else b""
    target = posixpath.join(spec.out_dir, plot_basename(spec.ordinal))
    return b"\\includegraphics" + options + b"{" + target.encode("utf-8") + b"}"
