"""Base error type carrying source position for editor-clickable diagnostics."""

from __future__ import annotations


class WeavetexError(Exception):
    """Pipeline error with an optional 1-based source line."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.message = message
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
