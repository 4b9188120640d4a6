"""Python interpreter backend for the weavetex NDJSON wire protocol.

Speaks the subprocess backend protocol on stdin/stdout: one handshake line,
then one JSON response line per JSON request line.  Three request kinds:

- ``eval``: evaluate an expression in the session namespace, answer with its
  LaTeX rendering.
- ``exec``: run statements in the same namespace, answer with a bare ok.
- ``plot``: treat the code as a call argument list (object expression plus
  optional ``key=value`` save arguments), evaluate the object, and hand it to
  its own ``save``/``savefig`` routine targeting the requested path.

The namespace persists for the life of the process and is never reset, so
later requests can refer to anything earlier ones defined.  Exceptions in
user code are contained: they become ``ok: false`` responses, never a dead
bridge.  Standard output belongs to the protocol alone; user ``print`` output
is rerouted to stderr.

LaTeX rendering: when the CAS environment is importable its canonical
``latex()`` conversion is used; otherwise an object's ``_latex_()`` method if
it has one, else ``str()``.
"""

from __future__ import annotations

import ast
import json
import os
import sys
from contextlib import redirect_stdout
from typing import Any, TextIO

HANDSHAKE = {"hello": 1, "backend": "pybridge"}


class Session:
    """One persistent interpreter namespace plus the rendering strategy."""

    def __init__(self) -> None:
        self.namespace: dict[str, Any] = {}
        self._latex_fn = None
        try:
            exec("from sage.all import *", self.namespace)
            import sage.all

            self._latex_fn = sage.all.latex
        except ImportError:
            pass

    def render_latex(self, value: Any) -> str:
        if self._latex_fn is not None:
            return str(self._latex_fn(value))
        conv = getattr(value, "_latex_", None)
        if callable(conv):
            return str(conv())
        return str(value)

    def eval(self, code: str) -> str:
        value = eval(compile(code, "<eval>", "eval"), self.namespace)
        return self.render_latex(value)

    def exec(self, code: str) -> None:
        exec(compile(code, "<exec>", "exec"), self.namespace)

    def plot(self, code: str, save_path: str) -> list[str]:
        obj_node, keyword_nodes = _split_plot_payload(code)
        obj = eval(compile(ast.Expression(body=obj_node), "<plot>", "eval"), self.namespace)
        kwargs = {
            kw.arg: eval(
                compile(ast.Expression(body=kw.value), "<plot-arg>", "eval"),
                self.namespace,
            )
            for kw in keyword_nodes
        }
        saver = getattr(obj, "save", None)
        if saver is None:
            saver = getattr(obj, "savefig", None)
        if saver is None:
            raise TypeError(
                f"{type(obj).__name__} object has no save or savefig method"
            )
        parent = os.path.dirname(save_path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        saver(save_path, **kwargs)
        return [save_path]


def _split_plot_payload(code: str) -> tuple[ast.expr, list[ast.keyword]]:
    """Split plot code into the object expression and save keywords.

    The payload has the shape of a call argument list: first the expression
    producing the plottable object, then zero or more ``key=value`` save
    arguments, e.g. ``p, axes=False``.
    """
    try:
        # trailing newline so a line comment in the code cannot eat the paren
        tree = ast.parse(f"__plot__({code}\n)", mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"malformed plot payload: {exc.msg}") from None
    call = tree.body
    assert isinstance(call, ast.Call)
    if not call.args:
        raise ValueError("plot payload has no object expression")
    if len(call.args) > 1:
        raise ValueError(
            "plot payload takes one object expression plus keyword arguments"
        )
    for kw in call.keywords:
        if kw.arg is None:
            raise ValueError("plot payload does not accept ** expansion")
    return call.args[0], call.keywords


def _error(request_id: int, message: str) -> dict[str, Any]:
    return {"id": request_id, "ok": False, "error": message}


def handle_line(session: Session, line: str) -> dict[str, Any]:
    """Answer one request line.  Never raises for user-level failures."""
    try:
        request = json.loads(line)
    except ValueError:
        return _error(0, "malformed request line: not valid JSON")
    if not isinstance(request, dict):
        return _error(0, "malformed request line: not a JSON object")
    request_id = request.get("id")
    if not isinstance(request_id, int) or isinstance(request_id, bool):
        return _error(0, "missing or non-integer request id")

    kind = request.get("kind")
    code = request.get("code")
    if kind not in ("eval", "exec", "plot"):
        return _error(request_id, f"unknown request kind: {kind!r}")
    if not isinstance(code, str):
        return _error(request_id, "missing or non-string code")

    try:
        # user code must not be able to scribble on the protocol stream
        with redirect_stdout(sys.stderr):
            if kind == "eval":
                return {"id": request_id, "ok": True, "latex": session.eval(code)}
            if kind == "exec":
                session.exec(code)
                return {"id": request_id, "ok": True}
            save_path = request.get("save_path")
            if not isinstance(save_path, str) or not save_path:
                return _error(request_id, "plot request without save_path")
            files = session.plot(code, save_path)
            return {"id": request_id, "ok": True, "files": files}
    except (Exception, SystemExit) as exc:
        return _error(request_id, f"{type(exc).__name__}: {exc}")


def serve(stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    """Run the request loop until stdin closes."""
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    session = Session()

    def emit(obj: dict[str, Any]) -> None:
        stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")
        stdout.flush()

    emit(HANDSHAKE)
    for line in stdin:
        if not line.strip():
            continue
        emit(handle_line(session, line))
    return 0


def main(argv: list[str] | None = None) -> int:
    # headless-safe default for matplotlib users; a preset value wins
    os.environ.setdefault("MPLBACKEND", "Agg")
    try:
        return serve()
    except BrokenPipeError:
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
