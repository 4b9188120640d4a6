"""Interpreter backends and the request/response wire types.

Two implementations: an in-process evaluator for the arithmetic
mini-language (no external interpreter needed, deterministic plot stubs)
and a subprocess client speaking newline-delimited JSON over the child's
stdin/stdout.  The protocol: the child first writes a handshake line
``{"hello":1,"backend":"<id>"}``, then answers one response object per
request object, echoing ids.  Nothing but protocol lines may appear on the
child's stdout.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import WeavetexError
from .minilang import MiniLangError, eval_expression, exec_statements, render
from .plots import PLOT_STUB_PAYLOAD


class BackendCrash(WeavetexError):
    """The backend session died before answering."""


class ProtocolViolation(WeavetexError):
    """The backend answered with something that is not a valid response."""


@dataclass(frozen=True, slots=True)
class BackendRequest:
    id: int
    kind: str  # "eval" | "exec" | "plot"
    code: str
    format: str | None = None
    save_path: str | None = None


@dataclass(frozen=True, slots=True)
class BackendResponse:
    id: int
    ok: bool
    latex: str | None = None
    files: tuple[str, ...] | None = None
    error: str | None = None


class Backend(Protocol):
    backend_id: str

    def start(self) -> None: ...

    def request(self, req: BackendRequest) -> BackendResponse: ...

    def close(self) -> None: ...


class BuiltinBackend:
    """Mini-language evaluator with stubbed plots.

    ``base_dir`` anchors relative plot save paths.  ``request_count`` exists
    so tests can prove paused and cached jobs never reach the backend.
    """

    backend_id = "builtin"

    def __init__(self, base_dir: Path | str = "."):
        self._base_dir = Path(base_dir)
        self._env: dict = {}
        self.request_count = 0

    def start(self) -> None:
        self._env = {}
        self.request_count = 0

    def request(self, req: BackendRequest) -> BackendResponse:
        self.request_count += 1
        try:
            if req.kind == "eval":
                return BackendResponse(
                    req.id, ok=True, latex=render(eval_expression(req.code, self._env))
                )
            if req.kind == "exec":
                exec_statements(req.code, self._env)
                return BackendResponse(req.id, ok=True)
            if req.kind == "plot":
                if req.save_path is None:
                    return BackendResponse(req.id, ok=False, error="plot without save_path")
                target = self._base_dir / req.save_path
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(PLOT_STUB_PAYLOAD)
                return BackendResponse(req.id, ok=True, files=(req.save_path,))
            return BackendResponse(req.id, ok=False, error=f"unknown request kind {req.kind!r}")
        except MiniLangError as exc:
            return BackendResponse(req.id, ok=False, error=exc.message)
        except OSError as exc:
            return BackendResponse(req.id, ok=False, error=f"cannot write plot: {exc}")

    def close(self) -> None:
        pass


class SubprocessBackend:
    """Client half of the NDJSON wire protocol."""

    def __init__(self, command: str, base_dir: Path | str = "."):
        if not command.strip():
            raise ValueError("empty backend command")
        self._argv = shlex.split(command)
        self._base_dir = Path(base_dir)
        self._proc: subprocess.Popen | None = None
        self.backend_id = "subprocess"

    def start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self._argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # child diagnostics flow through
                cwd=self._base_dir,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise BackendCrash(f"cannot start backend: {exc}") from exc
        line = self._proc.stdout.readline()
        if not line:
            raise BackendCrash("backend exited before its handshake")
        try:
            handshake = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolViolation(f"bad handshake line: {line!r}") from None
        if (
            not isinstance(handshake, dict)
            or handshake.get("hello") != 1
            or not isinstance(handshake.get("backend"), str)
        ):
            raise ProtocolViolation(f"bad handshake object: {handshake!r}")
        self.backend_id = handshake["backend"]

    def request(self, req: BackendRequest) -> BackendResponse:
        if self._proc is None:
            raise BackendCrash("backend session not started")
        payload = {"id": req.id, "kind": req.kind, "code": req.code}
        if req.format is not None:
            payload["format"] = req.format
        if req.save_path is not None:
            payload["save_path"] = req.save_path
        try:
            self._proc.stdin.write(json.dumps(payload, sort_keys=True) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendCrash(f"backend pipe closed: {exc}") from exc
        line = self._proc.stdout.readline()
        if not line:
            raise BackendCrash("backend closed its output mid-session")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolViolation(f"response is not JSON: {line!r}") from None
        if not isinstance(obj, dict):
            raise ProtocolViolation(f"response is not an object: {obj!r}")
        if obj.get("id") != req.id:
            raise ProtocolViolation(
                f"response id {obj.get('id')!r} does not match request id {req.id}"
            )
        ok = obj.get("ok")
        if not isinstance(ok, bool):
            raise ProtocolViolation("response 'ok' must be a boolean")
        latex = obj.get("latex")
        if latex is not None and not isinstance(latex, str):
            raise ProtocolViolation("response 'latex' must be a string")
        error = obj.get("error")
        if error is not None and not isinstance(error, str):
            raise ProtocolViolation("response 'error' must be a string")
        files_raw = obj.get("files")
        files: tuple[str, ...] | None = None
        if files_raw is not None:
            if not isinstance(files_raw, list) or not all(
                isinstance(item, str) for item in files_raw
            ):
                raise ProtocolViolation("response 'files' must be a list of strings")
            files = tuple(files_raw)
        return BackendResponse(req.id, ok=ok, latex=latex, files=files, error=error)

    def close(self) -> None:
        proc = self._proc
        if proc is None:
            return
        self._proc = None
        try:
            if proc.stdin:
                proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


def make_backend(selector: str, base_dir: Path | str = ".") -> Backend:
    """Build a backend from a CLI selector string.

    "builtin" or "subprocess:<command line>".
    """
    if selector == "builtin":
        return BuiltinBackend(base_dir)
    if selector.startswith("subprocess:"):
        command = selector[len("subprocess:"):]
        if not command.strip():
            raise WeavetexError("subprocess backend needs a command line")
        return SubprocessBackend(command, base_dir)
    raise WeavetexError(f"unknown backend {selector!r}")
