"""Versioned JSON document I/O shared by the plan and results files.

Files are UTF-8 with sorted keys and "\\n" line endings, written via a temp
file plus rename so a crashed run never leaves a half-written artifact.
Fields holding document bytes are stored as plain strings when the bytes are
valid UTF-8 and as ``<key>_b64`` base64 otherwise, so arbitrary input bytes
round-trip exactly.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
import tempfile
from pathlib import Path

from .errors import WeavetexError


class IoError(WeavetexError):
    """The file could not be read or written."""


class VersionMismatch(WeavetexError):
    """The file's schema version is not the supported one."""


class ParseError(WeavetexError):
    """The file is not a well-formed document of the expected shape."""


def dump_json_atomic(obj: dict, path: Path | str) -> None:
    """Serialize ``obj`` deterministically and atomically replace ``path``."""
    text = json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    path = Path(path)
    try:
        fd, tmp_name = tempfile.mkstemp(
            prefix=path.name + ".", suffix=".tmp", dir=path.parent
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            os.unlink(tmp_name)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_json_document(path: Path | str, expected_version: int) -> dict:
    """Load a versioned JSON document, checking its ``version`` field."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8: {exc}") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "version" not in obj:
        raise ParseError(f"{path}: not a versioned document")
    if obj["version"] != expected_version:
        raise VersionMismatch(
            f"{path}: version {obj['version']!r}, expected {expected_version}"
        )
    return obj


def put_bytes_field(obj: dict, key: str, data: bytes | None) -> None:
    """Store optional bytes under ``key`` (UTF-8) or ``key_b64`` (otherwise)."""
    if data is None:
        return
    try:
        obj[key] = data.decode("utf-8")
    except UnicodeDecodeError:
        obj[key + "_b64"] = base64.b64encode(data).decode("ascii")


def get_bytes_field(obj: dict, key: str) -> bytes | None:
    """Inverse of :func:`put_bytes_field`."""
    if key in obj:
        value = obj[key]
        if not isinstance(value, str):
            raise ParseError(f"field {key!r} must be a string")
        return value.encode("utf-8")
    if key + "_b64" in obj:
        try:
            return base64.b64decode(obj[key + "_b64"], validate=True)
        except (binascii.Error, TypeError) as exc:
            raise ParseError(f"field {key}_b64 is not valid base64") from exc
    return None
