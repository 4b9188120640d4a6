"""Literate-computation preprocessor for LaTeX documents.

Pipeline: scan the source for computation directives, plan them into an
ordered hashed job list, execute against a backend in one persistent
session, then splice results back into a fully resolved document.
"""

from .backends import (
    Backend,
    BackendCrash,
    BackendRequest,
    BackendResponse,
    BuiltinBackend,
    ProtocolViolation,
    SubprocessBackend,
    make_backend,
)
from .errors import WeavetexError
from .executor import execute
from .model import (
    Directive,
    DirectiveKind,
    Job,
    ResultRecord,
    ResultSet,
    ResultStatus,
    content_hash,
    doc_hash,
)
from .planner import JobPlan, PauseInsidePause, UnmatchedUnpause, plan, read_plan, write_plan
from .plots import (
    PLOT_STUB_PAYLOAD,
    FormatPlan,
    PlotSpec,
    UnknownFormat,
    includegraphics_text,
    resolve_formats,
)
from .results_io import ParseError, VersionMismatch, read_results, write_results
from .scanner import ScanOutput, scan_document
from .splicer import DocMismatch, ResolvedDocument, splice

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BackendCrash",
    "BackendRequest",
    "BackendResponse",
    "BuiltinBackend",
    "Directive",
    "DirectiveKind",
    "DocMismatch",
    "FormatPlan",
    "Job",
    "JobPlan",
    "PLOT_STUB_PAYLOAD",
    "ParseError",
    "PauseInsidePause",
    "PlotSpec",
    "ProtocolViolation",
    "ResolvedDocument",
    "ResultRecord",
    "ResultSet",
    "ResultStatus",
    "ScanOutput",
    "SubprocessBackend",
    "UnknownFormat",
    "UnmatchedUnpause",
    "VersionMismatch",
    "WeavetexError",
    "content_hash",
    "doc_hash",
    "execute",
    "includegraphics_text",
    "make_backend",
    "plan",
    "read_plan",
    "read_results",
    "resolve_formats",
    "scan_document",
    "splice",
    "write_plan",
    "write_results",
]
